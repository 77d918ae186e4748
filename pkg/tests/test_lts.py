import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordsynth.errors import PreconditionError, StateSpaceError
from coordsynth.lts import (ActionLabel, Lts, RelabelMap, Tau, close, deadlock_states,
                            decouple, isomorphic, lbl, parallel_compose,
                            project_onto_channels, relabel, traces)
from coordsynth.system import SystemModel, fresh_channel_id
from oracles import (all_traces, brute_compose, erasure, flatten_left, flatten_right, is_acyclic,
                     lts_st, permute_states)


def test_label_invariants():
    a = lbl("!req_1")
    assert a.complement() == lbl("?req_1")
    assert a.complement().complement() == a
    assert str(a) == "!req_1"
    for bad in [("!", "1x", 1), ("!", "a_b", 1), ("*", "a", 1), ("!", "a", -1)]:
        with pytest.raises(ValueError):
            ActionLabel(*bad)


@given(st.sampled_from("!?"), st.sampled_from(["a", "req", "X9"]), st.integers(0, 500))
def test_complement_is_an_involution(d, name, ch):
    a = ActionLabel(d, name, ch)
    assert a.complement().complement() == a
    assert a.complement().port == a.port


def test_lts_prunes_unreachable():
    lts = Lts([("a", lbl("!x_1"), "b"), ("c", lbl("!y_1"), "d")], "a", ["b", "c"])
    assert lts.states == {"a", "b"}
    assert lts.marked == {"b"}
    assert len(lts.transitions) == 1


# -------------------------------------------------------------- relabeling

def test_relabel_examples():
    k = Lts([("s", lbl("?req_1"), "t"), ("t", lbl("!ok_2"), "s")], "s")
    moved = relabel(k, RelabelMap.collapse_channels({1}, 417))
    assert lbl("?req_417") in moved.labels and lbl("!ok_2") in moved.labels
    assert isomorphic(relabel(k, RelabelMap.identity()), k)
    flipped = relabel(k, RelabelMap.direction_flip())
    assert lbl("?ok_2") in flipped.labels and lbl("!req_1") in flipped.labels


@given(lts_st(), st.integers(0, 2), st.integers(3, 9))
def test_relabel_preserves_graph(lts, old, new):
    for m in (RelabelMap.channel_substitution(old, new), RelabelMap.direction_flip()):
        r = relabel(lts, m)
        assert len(r.states) == len(lts.states)
        assert r.marked == lts.marked
        # different labels may collapse onto one only for channel moves
        assert len(r.transitions) <= len(lts.transitions)
    sub = RelabelMap.channel_substitution(old, new)
    flip = RelabelMap.direction_flip()
    for l in lts.action_labels:
        assert (sub(l).direction, sub(l).name) == (l.direction, l.name)
        assert (flip(l).name, flip(l).channel) == (l.name, l.channel)


def test_relabel_moves_tau_annotations():
    t = Lts([("s", Tau(lbl("!a_1")), "t")], "s")
    assert relabel(t, RelabelMap.channel_substitution(1, 5)).labels == {Tau(lbl("!a_5"))}


# -------------------------------------------------------------- composition

def test_forced_synchronization():
    a = Lts([("s0", lbl("!a_0"), "s1")], "s0", name="A")
    b = Lts([("t0", lbl("?a_0"), "t1")], "t0", name="B")
    c = parallel_compose([a, b], {lbl("!a_0")})
    assert c.states == {("s0", "t0"), ("s1", "t1")}
    assert c.transitions == {(("s0", "t0"), Tau(lbl("!a_0")), ("s1", "t1"))}


def test_no_partner_deadlocks():
    a = Lts([("s0", lbl("!a_0"), "s1")], "s0")
    b = Lts([("t0", lbl("?b_0"), "t1")], "t0")
    c = parallel_compose([a, b], {("a", 0), ("b", 0)})
    assert c.states == {("s0", "t0")}
    assert deadlock_states(c) == {("s0", "t0")}


def test_unhidden_labels_interleave_and_synchronize():
    a = Lts([("s0", lbl("!a_0"), "s1")], "s0")
    b = Lts([("t0", lbl("?a_0"), "t1")], "t0")
    c = parallel_compose([a, b])
    labels = {l for _, l, _ in c.transitions}
    assert labels == {lbl("!a_0"), lbl("?a_0"), Tau(lbl("!a_0"))}


def test_marks_from_any_constituent():
    a = Lts([("s0", lbl("!a_0"), "s1")], "s0", ["s1"])
    b = Lts([("t0", lbl("?a_0"), "t1")], "t0")
    c = close([a, b])
    assert c.marked == {("s1", "t1")}


def test_state_cap_is_explicit():
    loops = [Lts([("x", lbl(f"!a{i}_{i}"), "y"), ("y", lbl(f"!b{i}_{i}"), "x")], "x")
             for i in range(12)]
    with pytest.raises(StateSpaceError):
        parallel_compose(loops, state_cap=1000)


def test_closed_example_cba_has_no_deadlock(cba, components):
    closed = cba.closed_lts()
    assert deadlock_states(closed) == frozenset()
    # independent enumeration agrees on the reachable product
    parts = [c.lts for c in components] + [cba.coordinator_lts()]
    ports = {l.port for p in parts for l in p.action_labels}
    states, edges = brute_compose(parts, ports)
    assert states == set(closed.states)
    assert edges == set(closed.transitions)
    assert all(any(e[0] == s for e in edges) for s in states)


@settings(max_examples=60, deadline=None)
@given(lts_st(max_states=4), lts_st(max_states=4), st.booleans())
def test_compose_matches_brute_force(a, b, hide_all):
    ports = {l.port for p in (a, b) for l in p.action_labels} if hide_all else set()
    c = parallel_compose([a, b], ports)
    states, edges = brute_compose([a, b], ports)
    assert set(c.states) == states
    assert set(c.transitions) == edges


@settings(max_examples=60, deadline=None)
@given(lts_st(max_states=4), lts_st(max_states=4), lts_st(max_states=4))
def test_composition_commutes_and_associates(a, b, c):
    ab = parallel_compose([a, b])
    ba = parallel_compose([b, a])
    assert permute_states(ba, (1, 0)) == ab
    ports = {l.port for p in (a, b, c) for l in p.action_labels}
    flat = parallel_compose([a, b, c], ports)
    left = parallel_compose([parallel_compose([a, b]), c], ports)
    right = parallel_compose([a, parallel_compose([b, c])], ports)
    assert flatten_left(left) == flat
    assert flatten_right(right) == flat


# -------------------------------------------------------------- projection

def test_projection_contracts_off_channel_arcs():
    lts = Lts([("a", lbl("!x_1"), "b"), ("b", lbl("!y_2"), "c"), ("c", lbl("!z_1"), "a")], "a")
    p = project_onto_channels(lts, {1})
    assert p.transitions == {("a", lbl("!x_1"), "b"), ("b", lbl("!z_1"), "a")}


def test_projection_drops_off_channel_self_loops_and_follows_start():
    lts = Lts([("s", lbl("!n_2"), "s"), ("s", lbl("!m_2"), "t"), ("t", lbl("!x_1"), "u")], "s")
    p = project_onto_channels(lts, {1})
    assert p.start == "s"
    assert p.transitions == {("s", lbl("!x_1"), "u")}


def test_projection_merges_marks():
    lts = Lts([("s", lbl("!n_2"), "t"), ("t", lbl("!x_1"), "s")], "s", ["t"])
    p = project_onto_channels(lts, {1})
    assert p.marked == {"s"}


def test_projection_of_example_coordinator(cba):
    k1 = project_onto_channels(cba.coordinator_lts(), {1})
    assert k1.channels == {1}
    assert k1.is_deterministic()
    # the client-mirroring shape: request, then ok back to idle or err to a retry state
    assert len(k1.states) == 3
    out = {str(l): d for l, d in k1.out(k1.start)}
    assert set(out) == {"?req_1"}
    busy = out["?req_1"]
    after = {str(l): d for l, d in k1.out(busy)}
    assert set(after) == {"!ok_1", "!err_1"}
    assert after["!ok_1"] == k1.start
    retry = {str(l): d for l, d in k1.out(after["!err_1"])}
    assert retry == {"?req_1": busy}
    k2 = project_onto_channels(cba.coordinator_lts(), {2})
    assert k2.channels == {2}


@settings(max_examples=150, deadline=None)
@given(lts_st(max_states=6), st.sets(st.integers(0, 2), min_size=1))
def test_projection_is_deterministic_and_idempotent(lts, chans):
    p = project_onto_channels(lts, chans)
    assert p.is_deterministic()
    assert p.channels <= chans
    assert project_onto_channels(p, chans) == p


@given(lts_st(max_states=5))
def test_projection_on_own_channels_keeps_deterministic_input(lts):
    chans = lts.channels | {0}
    if lts.is_deterministic():
        assert isomorphic(project_onto_channels(lts, chans), lts)


@settings(max_examples=150, deadline=None)
@given(lts_st(max_states=6, acyclic=True), st.sets(st.integers(0, 2), min_size=1))
def test_projection_covers_erased_traces(lts, chans):
    assert is_acyclic(lts)
    p = project_onto_channels(lts, chans)
    expected = erasure(all_traces(lts, 8), chans)
    assert expected <= all_traces(p, 8)


def test_projection_can_exceed_the_erasure():
    # Contracting the off-channel arc ν -y_2-> μ glues μ's future onto ν, so
    # x_1 k_1 appears although no run performs k_1 after x_1.
    lts = Lts([("s", lbl("!p_1"), "v"), ("s", lbl("!x_1"), "m"), ("v", lbl("!y_2"), "m"),
               ("m", lbl("!z_1"), "t"), ("v", lbl("!k_1"), "u")], "s")
    p = project_onto_channels(lts, {1})
    got = all_traces(p, 8)
    expected = erasure(all_traces(lts, 8), {1})
    assert expected < got
    assert (lbl("!x_1"), lbl("!k_1")) in got - expected


def test_projection_requires_channels():
    with pytest.raises(PreconditionError):
        project_onto_channels(Lts([], "s"), set())


# -------------------------------------------------------------- decoupling etc.

def test_decouple_examples(cba):
    k = cba.coordinator_lts()
    kf = decouple(k, {1}, 417)
    assert all(l.channel != 1 for l in kf.action_labels)
    assert {l.name for l in kf.action_labels if l.channel == 417} == {"req", "ok", "err"}
    assert decouple(k, set(), 417) is k
    with pytest.raises(PreconditionError):
        decouple(k, {1}, 2)
    with pytest.raises(PreconditionError):
        decouple(k, {1}, 1)


@given(lts_st(max_states=5))
def test_decouple_keeps_label_multiset(lts):
    d = decouple(lts, {1, 2}, 9)
    before = sorted((l.direction, l.name) for _, l, _ in lts.transitions if l.channel in (1, 2))
    after = sorted((l.direction, l.name) for _, l, _ in d.transitions if l.channel == 9)
    # equal labels on channels 1 and 2 leaving one state towards one target merge
    assert set(after) == set(before)
    assert len(after) <= len(before)


@given(lts_st(max_states=5))
def test_decouple_round_trip(lts):
    if 9 in lts.channels:
        return
    back = relabel(decouple(lts, {1}, 9), RelabelMap.channel_substitution(9, 1))
    assert back == lts


def test_fresh_channel_id():
    a = Lts([("s", lbl("!x_417"), "s")], "s")
    assert fresh_channel_id(SystemModel(())) == 0
    from coordsynth.system import Component
    sys1 = SystemModel((Component("A", a, 417), Component("B", Lts([("s", lbl("!y_1"), "s")], "s"), 1)))
    assert fresh_channel_id(sys1) == 418
    b = [Component(f"C{i}", Lts([("s", lbl(f"!y_{i}"), "s")], "s"), i) for i in range(4)]
    assert fresh_channel_id(SystemModel(tuple(b))) == 4


def test_deadlock_states_examples():
    assert deadlock_states(Lts([], "s")) == {"s"}
    loops = Lts([("s", lbl("!a_1"), "t"), ("t", lbl("!a_1"), "t"), ("s", lbl("!a_1"), "s")], "s")
    assert deadlock_states(loops) == frozenset()


def test_traces_helper_agrees_with_oracle():
    lts = Lts([("s", lbl("!a_1"), "t"), ("t", lbl("?b_1"), "s")], "s")
    assert traces(lts, 5) == all_traces(lts, 5)
    assert len(traces(lts, 3)) == 4


def test_renumbered_is_isomorphic():
    lts = Lts([(("x", 1), lbl("!a_1"), ("y", 2)), (("y", 2), lbl("?b_1"), ("x", 1))],
              ("x", 1), [("y", 2)])
    r = lts.renumbered("Q")
    assert r.start == "Q0"
    assert isomorphic(r, lts)
    assert not isomorphic(r, Lts([("Q0", lbl("!a_1"), "Q1")], "Q0", ["Q1"]))


def test_compose_start_product_is_ordered():
    parts = [Lts([("s", lbl(f"!a_{i}"), "s")], "s") for i in range(3)]
    c = parallel_compose(parts)
    assert c.start == ("s", "s", "s")
    assert len(list(itertools.islice(c.transitions, 10))) == 3
