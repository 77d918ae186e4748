import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordsynth.errors import ParseError, PreconditionError
from coordsynth.lts import lbl
from coordsynth.msc import (Bmsc, Hmsc, Lifeline, Message, MscDocument, assign_channels,
                            expand_instance_sets, msc_to_lts, parse_msc, render_msc)
from oracles import all_traces

ONE = """\
bmsc Call
lifeline WR {WR} @432
lifeline K1 {K_1} @417
msg WR -> K1 req request
end
hmsc
start -> Call
Call -> end
end
"""


def test_single_message_document():
    doc = parse_msc(ONE)
    (b,) = doc.bmscs
    assert b.events == (Message("WR", "K1", "req", "request"),)
    wr = msc_to_lts(doc, "WR")
    assert wr.transitions == {("q0", lbl("!req_432"), "Call.1")}


def test_chain_projection():
    doc = parse_msc("""\
bmsc AB
lifeline X {X} @7
lifeline Y {Y} @8
msg X -> Y a request
msg Y -> X b notification
end
hmsc
start -> AB
AB -> end
end
""")
    x = msc_to_lts(doc, "X")
    assert all_traces(x, 5) == {(), (lbl("!a_7"),), (lbl("!a_7"), lbl("?b_7"))}


def test_self_loop_in_hmsc_gives_a_cycle():
    doc = parse_msc("""\
bmsc Ping
lifeline X {X} @1
lifeline Y {Y} @2
msg X -> Y p request
msg Y -> X q notification
end
hmsc
start -> Ping
Ping -> Ping
end
""")
    x = msc_to_lts(doc, "X")
    words = all_traces(x, 8)
    for n in range(1, 5):
        assert (lbl("!p_1"), lbl("?q_1")) * n in words


def test_retry_document_structure(retry_doc):
    assert [b.name for b in retry_doc.bmscs] == ["Request", "Success", "Retry1", "Retry2",
                                                 "Failure"]
    assert ("Retry2", "Failure") in retry_doc.hmsc.edges
    assert retry_doc.instances == {"Client1", "Client3", "WR", "K_1"}
    assert parse_msc(render_msc(retry_doc)) == retry_doc


def test_wrapper_resends_at_most_twice(retry_doc):
    doc = expand_instance_sets(retry_doc)
    wr = msc_to_lts(doc, "WR", top_peers={"K1"})
    assert wr.channels == {432, 401}
    assert wr.is_deterministic()
    # between two client requests at most three forwarded requests (one plus two re-sends)
    for word in all_traces(wr, 16):
        run = 0
        for l in word:
            if l == lbl("?req_401"):
                run = 0
            elif l == lbl("!req_432"):
                run += 1
                assert run <= 3


def test_expansion_clones_set_lifelines(retry_doc):
    doc = expand_instance_sets(retry_doc)
    assert sorted(doc.lifelines) == ["C[Client1]", "C[Client3]", "K1", "WR"]
    assert doc.lifelines["C[Client1]"].channels == (1,)
    assert doc.lifelines["C[Client3]"].channels == (433,)
    c1 = msc_to_lts(doc, "Client1")
    c3 = msc_to_lts(doc, "Client3")
    from coordsynth.lts import RelabelMap, isomorphic, relabel
    assert isomorphic(relabel(c3, RelabelMap.channel_substitution(433, 1)), c1)
    assert c3.channels == {433}


def test_expansion_is_idempotent_and_keeps_singletons(retry_doc):
    once = expand_instance_sets(retry_doc)
    assert expand_instance_sets(once) == once
    single = parse_msc(ONE)
    assert expand_instance_sets(single) is single


def test_three_instances_replicate_messages():
    doc = parse_msc("""\
bmsc S
lifeline G {A, B, C}
lifeline W {W}
msg G -> W x request
msg W -> G y notification
end
hmsc
start -> S
end
""")
    e = expand_instance_sets(doc)
    (b,) = e.bmscs
    assert len(b.lifelines) == 4
    assert len(b.events) == 2 * 3
    assert {m.origin for m in b.events} == {0, 1}


def test_replicas_project_once():
    doc = assign_channels(parse_msc("""\
bmsc S
lifeline G {A, B}
lifeline W {W}
msg G -> W x request
end
hmsc
start -> S
end
"""), 10)
    w = msc_to_lts(expand_instance_sets(doc), "W")
    assert len(w.transitions) == 1


def test_assign_channels_uses_known_and_two_sided():
    doc = parse_msc("""\
bmsc S
lifeline C {Client2}
lifeline W {W}
lifeline K {K_2}
msg C -> W r request
msg W -> K r request
end
hmsc
start -> S
end
""")
    a = assign_channels(doc, 10, known={"Client2": 2}, two_sided={"W"})
    ls = a.lifelines
    assert ls["C"].channels == (2,)
    assert ls["K"].channels == (10,)
    assert ls["W"].channels == (11, 12)
    w = msc_to_lts(a, "W", top_peers={"K"})
    assert {str(l) for l in w.action_labels} == {"?r_12", "!r_11"}


@pytest.mark.parametrize("text,needle", [
    ("bmsc A\nlifeline X {X}\nmsg X -> X a request\nend\nhmsc\nend\n", "itself"),
    ("bmsc A\nlifeline X {X}\nlifeline Y {Y}\nmsg X -> Z a request\nend\n", "unknown lifeline"),
    ("bmsc A\nlifeline X {X}\nend\nhmsc\nstart -> B\nend\n", "unknown bMSC"),
    ("bmsc A\nlifeline X {X} @1\nend\nbmsc B\nlifeline X {X} @2\nend\n", "differently"),
    ("bmsc A\nlifeline X {}\nend\n", "without instances"),
    ("bmsc A\nlifeline X {X}\nmsg X -> Y a maybe\nend\n", "malformed message"),
    ("bmsc A\nlifeline X {X}\n", "not closed"),
    ("bmsc A\nlifeline X {X, Y}\nlifeline Z {Y}\nend\n", "two lifelines"),
    ("hmsc\nA -> start\nend\n", "incoming"),
    ("hmsc\nend -> A\nend\n", "outgoing"),
    ("oops\n", "unexpected"),
])
def test_parse_errors(text, needle):
    with pytest.raises(ParseError, match=needle):
        parse_msc(text)


def test_parse_error_line_number():
    with pytest.raises(ParseError) as err:
        parse_msc("bmsc A\nlifeline X {X}\nmsg X ->\nend\n")
    assert err.value.line == 3


def test_instance_must_occur():
    doc = parse_msc(ONE)
    with pytest.raises(PreconditionError):
        msc_to_lts(doc, "Nobody")


def test_projection_requires_expansion(retry_doc):
    with pytest.raises(PreconditionError):
        msc_to_lts(retry_doc, "Client1")


_names = st.sampled_from(["m", "n", "o"])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["X", "Y", "Z"]), st.sampled_from(["X", "Y", "Z"]), _names),
                min_size=1, max_size=5))
def test_acyclic_paths_follow_event_order(msgs):
    msgs = [(a, b, n) for a, b, n in msgs if a != b]
    if not msgs:
        return
    lifelines = (Lifeline("X", ("X",), (1,)), Lifeline("Y", ("Y",), (2,)), Lifeline("Z", ("Z",), (3,)))
    b = Bmsc("S", lifelines, tuple(Message(a, c, n) for a, c, n in msgs))
    doc = MscDocument((b,), Hmsc((("start", "S"), ("S", "end"))))
    for inst, ch in (("X", 1), ("Y", 2), ("Z", 3)):
        expected = tuple(lbl(("!" if a == inst else "?") + f"{n}_{ch}")
                         for a, c, n in msgs if inst in (a, c))
        if not expected:
            with pytest.raises(PreconditionError):
                msc_to_lts(doc, inst)
            continue
        lts = msc_to_lts(doc, inst)
        assert max(all_traces(lts, 10), key=len) == expected
        assert len(lts.states) <= len(expected) + 1
