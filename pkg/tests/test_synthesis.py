import pytest

from coordsynth.buchi import model_check, observed
from coordsynth.errors import ChannelMismatchError, PreconditionError, SynthesisError
from coordsynth.formats import parse_buchi
from coordsynth.lts import ActionLabel, Lts, close, deadlock_states, lbl
from coordsynth.synthesis import build_cba, enforce, synthesize, synthesize_noop
from coordsynth.system import Component, SystemModel
from oracles import all_traces


def test_single_forwarding():
    a = Component("A", Lts([("s", lbl("!a_1"), "s")], "s"), 1)
    b = Component("B", Lts([("t", lbl("?a_2"), "t")], "t"), 2)
    noop = synthesize_noop([a, b])
    assert len(noop.states) == 2
    assert {str(l) for l in noop.labels} == {"?a_1", "!a_2"}
    for s in noop.states:
        (label, nxt), = noop.out(s)
        (label2, back), = noop.out(nxt)
        assert back == s and {str(label), str(label2)} == {"?a_1", "!a_2"}


def test_silent_component_is_ignored():
    a = Component("A", Lts([("s", lbl("!a_1"), "s")], "s"), 1)
    b = Component("B", Lts([("t", lbl("?a_2"), "t")], "t"), 2)
    idle = Component("I", Lts([], "i"), 3)
    noop = synthesize_noop([a, b, idle])
    assert 3 not in noop.channels


def test_unmatched_send_is_an_error():
    a = Component("A", Lts([("s", lbl("!a_1"), "s")], "s"), 1)
    b = Component("B", Lts([("t", lbl("?b_2"), "t")], "t"), 2)
    with pytest.raises(SynthesisError, match="!a_1"):
        synthesize_noop([a, b])


def test_duplicate_channels_rejected():
    a = Component("A", Lts([("s", lbl("!a_1"), "s")], "s"), 1)
    with pytest.raises(PreconditionError):
        synthesize_noop([a, Component("B", Lts([("t", lbl("?a_1"), "t")], "t"), 1)])


def test_example_noop_routes_requests(components):
    noop = synthesize_noop(components)
    assert noop.is_deterministic()
    labels = {str(l) for l in noop.labels}
    assert {"?req_1", "?req_2", "!req_3", "?ok_3", "!ok_1", "!ok_2", "?err_3", "!err_1"} <= labels
    assert "!err_2" not in labels  # Client2 cannot take an error
    # every input is immediately followed by outputs only
    for s, l, d in noop.transitions:
        if not l.is_output:
            assert noop.out(d) and all(x.is_output for x, _ in noop.out(d))


def test_empty_properties_keep_noop(components):
    noop = synthesize_noop(components)
    k0 = enforce(noop, components, ())
    assert len(k0.states) == len(noop.states)
    assert len(k0.transitions) == len(noop.transitions)
    assert deadlock_states(close([c.lts for c in components] + [k0])) == frozenset()


def _cfa_words(components, depth):
    closed = SystemModel(tuple(components)).cfa_closed_lts()
    return {tuple(observed(l) for l in w) for w in all_traces(closed, depth)}


def _component_events(components, k, depth):
    """Closed CBA words with the coordinator's forwarding steps dropped, on connector 0."""
    closed = close([c.lts for c in components] + [k])
    consumers = {(l.name, c.channel) for c in components for l in c.lts.action_labels
                 if not l.is_output}
    words = set()
    for w in all_traces(closed, depth):
        ev = [observed(l) for l in w]
        words.add(tuple(e.on(0) for e in ev if (e.name, e.channel) not in consumers))
    return words


def test_noop_cba_matches_cfa_up_to_forwarding(components):
    k0 = enforce(synthesize_noop(components), components, ())
    cba = {w for w in _component_events(components, k0, 10) if len(w) <= 4}
    assert cba == _cfa_words(components, 4)


def test_example_coordinator_alternates(cba, alternating, components):
    k = cba.coordinator_lts()
    closed = cba.closed_lts()
    assert deadlock_states(closed) == frozenset()
    assert model_check(closed, alternating).empty
    for w in all_traces(k, 12):
        reqs = [l.channel for l in w if isinstance(l, ActionLabel) and l.name == "req"
                and not l.is_output]
        assert all(a != b for a, b in zip(reqs, reqs[1:]))
    assert k.marked  # acceptance visits are marked


def _homomorphism(k, noop):
    image = {k.start: noop.start}
    stack = [k.start]
    while stack:
        s = stack.pop()
        targets = dict(noop.out(image[s]))
        for l, d in k.out(s):
            if l not in targets:
                return None
            if d in image:
                if image[d] != targets[l]:
                    return None
            else:
                image[d] = targets[l]
                stack.append(d)
    return image


def test_coordinator_maps_into_noop(cba, components):
    noop = synthesize_noop(components)
    assert _homomorphism(cba.coordinator_lts(), noop) is not None


def test_impossible_property_fails(components):
    # requests may only follow an action nobody performs
    p = parse_buchi("buchi Never\nstart a\naccepting a b\na !zap_9 b\nb !req_1 b\nb !req_2 b\n")
    with pytest.raises(SynthesisError) as err:
        synthesize(SystemModel(components), [p])
    assert err.value.counterexample == []


def test_step_budget(components, alternating):
    p = parse_buchi("buchi Never\nstart a\naccepting a b\na !zap_9 b\nb !req_1 b\nb !req_2 b\n")
    with pytest.raises(SynthesisError):
        synthesize(SystemModel(components), [p], step_budget=1)


def test_build_cba_checks_channels(components, cba):
    bad = Lts([("k", lbl("?x_7"), "k")], "k")
    with pytest.raises(ChannelMismatchError):
        build_cba(components, bad)
    assert build_cba(components, cba.coordinator_lts()).kind == "CBA"


def test_echo_coordinator_mirrors_component():
    c = Component("C", Lts([("s", lbl("!ping_1"), "t"), ("t", lbl("?ping_1"), "s")], "s"), 1)
    echo = Lts([("e", lbl("?ping_1"), "f"), ("f", lbl("!ping_1"), "e")], "e")
    closed = build_cba([c], echo).closed_lts()
    assert len(closed.states) == 2 and not deadlock_states(closed)
