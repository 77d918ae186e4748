"""Büchi automata over action labels and the automata-theoretic checks.

Edge guards are either a concrete label or "any action except a finite set";
the file syntax exposes the two useful instances of the latter, the
universal action ``?true_`` (nothing excluded, direction ignored) and the
negative action ``!-req_2`` (exactly one label excluded, direction honored).
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable

import networkx as nx

from .errors import StateSpaceError, UnsupportedFragmentError
from .lts import (DEFAULT_STATE_CAP, OUTPUT, ActionLabel, Lts, Tau, label_key,
                  state_key)

CONCRETE = "concrete"
EXCEPT = "except"

ALL_ACCEPTING = "all"
MARKED_ACCEPTING = "marked"

# event used for the self-loop added at deadlocked model states
STUTTER = Tau()


@dataclass(frozen=True)
class EdgeGuard:
    kind: str
    label: object = None
    excluded: frozenset = frozenset()

    @classmethod
    def concrete(cls, label):
        return cls(CONCRETE, label)

    @classmethod
    def universal(cls):
        return cls(EXCEPT)

    @classmethod
    def negative(cls, label: ActionLabel):
        return cls(EXCEPT, None, frozenset({label}))

    @property
    def is_concrete(self):
        return self.kind == CONCRETE

    @property
    def is_universal(self):
        return self.kind == EXCEPT and not self.excluded

    @property
    def is_negative(self):
        return self.kind == EXCEPT and len(self.excluded) == 1

    def matches(self, action) -> bool:
        if self.kind == CONCRETE:
            return self.label == action
        return isinstance(action, ActionLabel) and action not in self.excluded

    def labels(self) -> frozenset:
        """Labels the guard names explicitly."""
        if self.kind == CONCRETE:
            return frozenset({self.label})
        return self.excluded

    def __str__(self):
        if self.kind == CONCRETE:
            return str(self.label)
        if self.is_universal:
            return "?true_"
        if self.is_negative:
            (x,) = self.excluded
            return f"{x.direction}-{x.name}_{x.channel}"
        return "~{" + ",".join(str(x) for x in sorted(self.excluded, key=label_key)) + "}"


def guard_matches(guard: EdgeGuard, action) -> bool:
    return guard.matches(action)


def guard_key(g: EdgeGuard):
    if g.kind == CONCRETE:
        return (0, label_key(g.label))
    return (1, tuple(sorted(label_key(x) for x in g.excluded)))


def meet(a: EdgeGuard, b: EdgeGuard) -> EdgeGuard | None:
    """Guard matching exactly the actions both ``a`` and ``b`` match."""
    if a.kind == CONCRETE:
        return a if b.matches(a.label) else None
    if b.kind == CONCRETE:
        return b if a.matches(b.label) else None
    return EdgeGuard(EXCEPT, None, a.excluded | b.excluded)


class BuchiProperty:
    """Büchi automaton whose edges carry :class:`EdgeGuard` s."""

    __slots__ = ("name", "states", "start", "transitions", "accepting", "_out")

    def __init__(self, transitions: Iterable = (), start=None, accepting: Iterable = (),
                 name: str = ""):
        transitions = [tuple(t) for t in transitions]
        if start is None:
            raise ValueError("a Büchi automaton needs a start state")
        out = defaultdict(list)
        for src, guard, dst in transitions:
            out[src].append((guard, dst))
        seen = {start}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for _, d in out.get(s, ()):
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
        self.name = name
        self.start = start
        self.states = frozenset(seen)
        self.transitions = frozenset(t for t in transitions if t[0] in seen)
        self.accepting = frozenset(a for a in accepting if a in seen)
        self._out = {s: tuple(sorted(set(out.get(s, ())),
                                     key=lambda e: (guard_key(e[0]), state_key(e[1]))))
                     for s in seen}

    def out(self, state):
        return self._out[state]

    @property
    def alphabet(self) -> frozenset:
        """Concrete labels and negated labels the automaton mentions."""
        result = set()
        for _, g, _ in self.transitions:
            result |= g.labels()
        return frozenset(result)

    @property
    def channels(self) -> frozenset:
        return frozenset(l.channel for l in self.alphabet if isinstance(l, ActionLabel))

    @property
    def is_safety(self) -> bool:
        return self.accepting == self.states

    def successors(self, state, action) -> frozenset:
        return frozenset(d for g, d in self._out[state] if g.matches(action))

    def is_deterministic_over(self, alphabet) -> bool:
        return all(len(self.successors(s, a)) <= 1 for s in self.states for a in alphabet)

    def sorted_transitions(self):
        return sorted(self.transitions,
                      key=lambda t: (state_key(t[0]), guard_key(t[1]), state_key(t[2])))

    def __eq__(self, other):
        if not isinstance(other, BuchiProperty):
            return NotImplemented
        return (self.start == other.start and self.transitions == other.transitions
                and self.accepting == other.accepting)

    def __hash__(self):
        return hash((self.start, self.transitions, self.accepting))

    def __repr__(self):
        return (f"BuchiProperty({self.name!r}, states={len(self.states)}, "
                f"transitions={len(self.transitions)}, accepting={len(self.accepting)})")


@dataclass(frozen=True)
class Verdict:
    """Outcome of an emptiness check; a non-empty language comes with a lasso."""

    empty: bool
    prefix: tuple | None = None
    cycle: tuple | None = None

    def __post_init__(self):
        if self.empty != (self.cycle is None):
            raise ValueError("a verdict carries a witness iff the language is non-empty")

    @property
    def witness(self):
        return None if self.empty else (self.prefix, self.cycle)

    def describe(self) -> str:
        if self.empty:
            return "empty"
        pre = " ".join(str(x) for x in self.prefix) or "ε"
        cyc = " ".join(str(x) for x in self.cycle)
        return f"{pre} ({cyc})^ω"


def lts_to_buchi(lts: Lts, policy: str = ALL_ACCEPTING) -> BuchiProperty:
    if policy == ALL_ACCEPTING:
        accepting = lts.states
    elif policy == MARKED_ACCEPTING:
        accepting = lts.marked
    else:
        raise ValueError(f"unknown acceptance policy {policy!r}")
    return BuchiProperty(((s, EdgeGuard.concrete(l), d) for s, l, d in lts.transitions),
                         lts.start, accepting, name=lts.name)


def _subset_name(subset, fallback):
    if len(subset) == 1:
        (only,) = subset
        return only
    if isinstance(fallback, str) or all(isinstance(s, str) for s in subset):
        return "{" + ",".join(str(s) for s in sorted(subset, key=state_key)) + "}"
    return tuple(sorted(subset, key=state_key))


def complement(b: BuchiProperty, alphabet: Iterable, state_cap: int = DEFAULT_STATE_CAP
               ) -> BuchiProperty:
    """Complement of a safety automaton over ``alphabet``.

    Runs are tracked by subset construction; a word leaves the automaton's
    transition structure as soon as the subset becomes empty, and from then
    on cycles in an accepting sink.  Only safety automata (every state
    accepting) are supported.
    """
    non_accepting = sorted(b.states - b.accepting, key=state_key)
    if non_accepting:
        raise UnsupportedFragmentError(
            f"{b.name or 'automaton'}: complementation is limited to safety automata "
            f"(every state accepting); state {non_accepting[0]} is not accepting. "
            "Full Büchi complementation is not supported.")
    letters = sorted(set(alphabet), key=label_key)
    sink = "sink"
    while sink in b.states:
        sink += "'"
    start = frozenset({b.start})
    names = {start: _subset_name(start, b.start)}
    queue = deque([start])
    transitions = []
    while queue:
        cur = queue.popleft()
        for a in letters:
            nxt = frozenset(d for s in cur for d in b.successors(s, a))
            if not nxt:
                transitions.append((names[cur], EdgeGuard.concrete(a), sink))
                continue
            if nxt not in names:
                names[nxt] = _subset_name(nxt, b.start)
                if len(names) > state_cap:
                    raise StateSpaceError(state_cap)
                queue.append(nxt)
            transitions.append((names[cur], EdgeGuard.concrete(a), names[nxt]))
    for a in letters:
        transitions.append((sink, EdgeGuard.concrete(a), sink))
    return BuchiProperty(transitions, names[start], [sink], name=f"NOT({b.name})")


def product(a: BuchiProperty, b: BuchiProperty, state_cap: int = DEFAULT_STATE_CAP
            ) -> BuchiProperty:
    """Intersection with the two-phase acceptance flag.

    The flag moves 0 -> 1 when leaving an accepting state of ``a`` and
    1 -> 0 when leaving an accepting state of ``b``; states ``(p, q, 1)``
    with ``q`` accepting in ``b`` are accepting.
    """
    start = (a.start, b.start, 0)
    seen = {start}
    queue = deque([start])
    transitions = []
    while queue:
        p, q, flag = state = queue.popleft()
        if flag == 0 and p in a.accepting:
            nflag = 1
        elif flag == 1 and q in b.accepting:
            nflag = 0
        else:
            nflag = flag
        for g1, p2 in a.out(p):
            for g2, q2 in b.out(q):
                g = meet(g1, g2)
                if g is None:
                    continue
                nxt = (p2, q2, nflag)
                transitions.append((state, g, nxt))
                if nxt not in seen:
                    seen.add(nxt)
                    if len(seen) > state_cap:
                        raise StateSpaceError(state_cap)
                    queue.append(nxt)
    accepting = [s for s in seen if s[2] == 1 and s[1] in b.accepting]
    return BuchiProperty(transitions, start, accepting, name=f"{a.name}*{b.name}")


def instantiate(guard: EdgeGuard):
    """A concrete action satisfying ``guard``."""
    if guard.kind == CONCRETE:
        return guard.label
    channel = 0
    while ActionLabel(OUTPUT, "any", channel) in guard.excluded:
        channel += 1
    return ActionLabel(OUTPUT, "any", channel)


def is_empty(b: BuchiProperty) -> Verdict:
    """Nested depth-first search for a reachable accepting cycle."""
    visited_outer = {b.start}
    visited_inner = set()
    stack = [(b.start, iter(b.out(b.start)))]
    path = []  # guards leading to the top of `stack`

    def inner(seed):
        istack = [(seed, iter(b.out(seed)))]
        ipath = []
        while istack:
            s, it = istack[-1]
            for g, d in it:
                if d == seed:
                    return ipath + [g]
                if d not in visited_inner:
                    visited_inner.add(d)
                    istack.append((d, iter(b.out(d))))
                    ipath.append(g)
                    break
            else:
                istack.pop()
                if ipath:
                    ipath.pop()
        return None

    while stack:
        s, it = stack[-1]
        for g, d in it:
            if d not in visited_outer:
                visited_outer.add(d)
                stack.append((d, iter(b.out(d))))
                path.append(g)
                break
        else:
            if s in b.accepting:
                cycle = inner(s)
                if cycle is not None:
                    return Verdict(False, tuple(instantiate(g) for g in path),
                                   tuple(instantiate(g) for g in cycle))
            stack.pop()
            if path:
                path.pop()
    return Verdict(True)


def accepts_lasso(b: BuchiProperty, prefix, cycle) -> bool:
    """Whether ``prefix cycle^ω`` is accepted; independent of :func:`is_empty`."""
    word = list(prefix) + list(cycle)
    if not cycle:
        raise ValueError("a lasso needs a non-empty cycle")
    loop_back = len(prefix)

    def nxt_pos(i):
        return i + 1 if i + 1 < len(word) else loop_back

    g = nx.DiGraph()
    start = (b.start, 0)
    g.add_node(start)
    queue = deque([start])
    while queue:
        q, i = node = queue.popleft()
        for d in b.successors(q, word[i]):
            nxt = (d, nxt_pos(i))
            if nxt not in g:
                g.add_node(nxt)
                queue.append(nxt)
            g.add_edge(node, nxt)
    for comp in nx.strongly_connected_components(g):
        if len(comp) == 1:
            (only,) = comp
            if not g.has_edge(only, only):
                continue
        if any(q in b.accepting for q, _ in comp):
            return True
    return False


def normalize_property(p: BuchiProperty) -> BuchiProperty:
    """Read every named label as the output side of a communication."""

    def norm(g):
        if g.kind == CONCRETE:
            lab = g.label
            return EdgeGuard.concrete(lab.as_output() if isinstance(lab, ActionLabel) else lab)
        return EdgeGuard(EXCEPT, None, frozenset(x.as_output() for x in g.excluded))

    return BuchiProperty(((s, norm(g), d) for s, g, d in p.transitions),
                         p.start, p.accepting, name=p.name)


def saturate(p: BuchiProperty, events: Iterable) -> BuchiProperty:
    """Add a self-loop for each event no guard of a state matches."""
    events = list(events)
    extra = []
    for s in p.states:
        for e in events:
            if not any(g.matches(e) for g, _ in p.out(s)):
                extra.append((s, EdgeGuard.concrete(e), s))
    return BuchiProperty(list(p.transitions) + extra, p.start, p.accepting, name=p.name)


def observed(label):
    """Event a property sees for a model label (output side of the message)."""
    if isinstance(label, Tau):
        return STUTTER if label.via is None else label.via.as_output()
    return label.as_output()


def model_as_buchi(model: Lts) -> BuchiProperty:
    transitions = [(s, EdgeGuard.concrete(observed(l)), d) for s, l, d in model.transitions]
    transitions += [(s, EdgeGuard.concrete(STUTTER), s)
                    for s in model.states if not model.out(s)]
    return BuchiProperty(transitions, model.start, model.states, name=model.name)


def violation_monitor(p: BuchiProperty, model_events: Iterable) -> tuple:
    """Return ``(saturated property, full alphabet)`` used to observe a model.

    Events the property does not name and that no guard at the current state
    matches leave the property where it is.
    """
    pn = normalize_property(p)
    sigma_p = pn.alphabet
    model_events = set(model_events) | {STUTTER}
    sat = saturate(pn, sorted(model_events - sigma_p, key=label_key))
    return sat, frozenset(model_events | sigma_p)


def model_check(closed: Lts, p: BuchiProperty, state_cap: int = DEFAULT_STATE_CAP) -> Verdict:
    """Search for a run of ``closed`` violating ``p``.

    Hidden synchronizations are observed through their annotation, every
    label is read as the output side of its message, and deadlocked states
    stutter so a violation right before a deadlock is still reported.
    """
    model = model_as_buchi(closed)
    sat, sigma = violation_monitor(p, (g.label for _, g, _ in model.transitions))
    return is_empty(product(model, complement(sat, sigma, state_cap), state_cap))
