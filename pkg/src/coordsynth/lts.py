"""Action labels, labeled transition systems and the operations on them.

An :class:`Lts` is an immutable value.  Every constructor prunes the states
that are unreachable from ``start``, so all operations below return
reachable-only systems.
"""
from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import networkx as nx

from .errors import PreconditionError, StateSpaceError

INPUT = "?"
OUTPUT = "!"

DEFAULT_STATE_CAP = 10**6

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


@dataclass(frozen=True, order=True)
class ActionLabel:
    """A message event ``!name_channel`` (output) or ``?name_channel`` (input)."""

    direction: str
    name: str
    channel: int

    def __post_init__(self):
        if self.direction not in (INPUT, OUTPUT):
            raise ValueError(f"bad direction {self.direction!r}")
        if not NAME_RE.match(self.name):
            raise ValueError(f"bad action name {self.name!r}")
        if not isinstance(self.channel, int) or self.channel < 0:
            raise ValueError(f"bad channel {self.channel!r}")

    @property
    def is_output(self) -> bool:
        return self.direction == OUTPUT

    def complement(self) -> ActionLabel:
        return ActionLabel(INPUT if self.is_output else OUTPUT, self.name, self.channel)

    def on(self, channel: int) -> ActionLabel:
        return ActionLabel(self.direction, self.name, channel)

    def as_output(self) -> ActionLabel:
        return self if self.is_output else self.complement()

    @property
    def port(self):
        """The ``(name, channel)`` pair shared by a label and its complement."""
        return (self.name, self.channel)

    def __str__(self):
        return f"{self.direction}{self.name}_{self.channel}"

    @classmethod
    def parse(cls, text: str) -> ActionLabel:
        m = re.fullmatch(r"([!?])([A-Za-z][A-Za-z0-9]*)_(\d+)", text)
        if not m:
            raise ValueError(f"not an action label: {text!r}")
        return cls(m.group(1), m.group(2), int(m.group(3)))


def lbl(text: str) -> ActionLabel:
    return ActionLabel.parse(text)


@dataclass(frozen=True)
class Tau:
    """Silent step left behind by a hidden synchronization.

    ``via`` keeps the output side of the synchronized pair so closed systems
    can still be observed by properties and simulators.
    """

    via: ActionLabel | None = None

    def __str__(self):
        return "tau" if self.via is None else f"tau:{self.via}"


def label_key(label):
    if isinstance(label, ActionLabel):
        return (0, label.channel, label.name, label.direction)
    if label.via is None:
        return (1,)
    return (2,) + label_key(label.via)


def state_key(state):
    if isinstance(state, str):
        return (0, len(state), state)
    if isinstance(state, int):
        return (1, state)
    if isinstance(state, tuple):
        return (2, tuple(state_key(s) for s in state))
    return (3, repr(state))


def event_of(label):
    """Observable event of a transition label; None for an unannotated tau."""
    if isinstance(label, Tau):
        return label.via
    return label


class Lts:
    """Labeled transition system with a start state and marked states."""

    __slots__ = ("name", "states", "start", "transitions", "marked", "_out")

    def __init__(self, transitions: Iterable = (), start=None, marked: Iterable = (),
                 name: str = ""):
        transitions = [tuple(t) for t in transitions]
        if start is None:
            raise ValueError("an LTS needs a start state")
        out = defaultdict(list)
        for src, label, dst in transitions:
            out[src].append((label, dst))
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
        self.marked = frozenset(m for m in marked if m in seen)
        self._out = {s: tuple(sorted(set(out.get(s, ())),
                                     key=lambda e: (label_key(e[0]), state_key(e[1]))))
                     for s in seen}

    def out(self, state):
        """Outgoing ``(label, target)`` pairs of ``state``, in a fixed order."""
        return self._out[state]

    @property
    def labels(self) -> frozenset:
        return frozenset(t[1] for t in self.transitions)

    @property
    def action_labels(self) -> frozenset:
        return frozenset(l for l in self.labels if isinstance(l, ActionLabel))

    @property
    def channels(self) -> frozenset:
        return frozenset(l.channel for l in self.action_labels)

    def is_deterministic(self) -> bool:
        for s in self.states:
            labels = [l for l, _ in self._out[s]]
            if len(labels) != len(set(labels)):
                return False
        return True

    def sorted_states(self):
        return sorted(self.states, key=state_key)

    def sorted_transitions(self):
        return sorted(self.transitions,
                      key=lambda t: (state_key(t[0]), label_key(t[1]), state_key(t[2])))

    def renumbered(self, prefix: str = "S", name: str | None = None) -> Lts:
        """Copy with string state ids ``prefix0, prefix1, ...`` in BFS order."""
        order = {self.start: 0}
        queue = deque([self.start])
        while queue:
            s = queue.popleft()
            for _, d in self._out[s]:
                if d not in order:
                    order[d] = len(order)
                    queue.append(d)
        ren = {s: f"{prefix}{i}" for s, i in order.items()}
        return Lts(((ren[a], l, ren[b]) for a, l, b in self.transitions),
                   ren[self.start], (ren[m] for m in self.marked),
                   name=self.name if name is None else name)

    def with_name(self, name: str) -> Lts:
        return Lts(self.transitions, self.start, self.marked, name=name)

    def __eq__(self, other):
        if not isinstance(other, Lts):
            return NotImplemented
        return (self.start == other.start and self.transitions == other.transitions
                and self.marked == other.marked and self.states == other.states)

    def __hash__(self):
        return hash((self.start, self.transitions, self.marked))

    def __repr__(self):
        return (f"Lts({self.name!r}, states={len(self.states)}, "
                f"transitions={len(self.transitions)})")


class RelabelMap:
    """Partial map on action labels; unmapped labels pass through unchanged.

    Tau annotations are relabeled too, so hidden events keep meaningful names.
    """

    def __init__(self, fn: Callable[[ActionLabel], ActionLabel | None], description="map"):
        self._fn = fn
        self.description = description

    def __call__(self, label):
        if isinstance(label, Tau):
            return label if label.via is None else Tau(self(label.via))
        image = self._fn(label)
        return label if image is None else image

    def then(self, other: RelabelMap) -> RelabelMap:
        return RelabelMap(lambda l: other(self(l)), f"{self.description};{other.description}")

    @classmethod
    def identity(cls):
        return cls(lambda l: None, "id")

    @classmethod
    def from_mapping(cls, mapping: Mapping[ActionLabel, ActionLabel]):
        mapping = dict(mapping)
        return cls(mapping.get, "explicit")

    @classmethod
    def channel_substitution(cls, old: int, new: int):
        """``a_old -> a_new`` for every label on channel ``old``."""
        return cls(lambda l: l.on(new) if l.channel == old else None, f"[{new}/{old}]")

    @classmethod
    def channel_map(cls, mapping: Mapping[int, int]):
        mapping = dict(mapping)
        return cls(lambda l: l.on(mapping[l.channel]) if l.channel in mapping else None,
                   f"channels{sorted(mapping.items())}")

    @classmethod
    def collapse_channels(cls, channels: Iterable[int], delta: int):
        return cls.channel_map({c: delta for c in channels})

    @classmethod
    def direction_flip(cls):
        return cls(lambda l: l.complement(), "env")


def relabel(lts: Lts, mapping: RelabelMap) -> Lts:
    return Lts(((s, mapping(l), d) for s, l, d in lts.transitions),
               lts.start, lts.marked, name=lts.name)


def _ports(hide) -> frozenset:
    ports = set()
    for h in hide:
        if isinstance(h, ActionLabel):
            ports.add(h.port)
        else:
            name, channel = h
            ports.add((name, int(channel)))
    return frozenset(ports)


def all_ports(*systems) -> frozenset:
    return frozenset(l.port for lts in systems for l in lts.action_labels)


def parallel_compose(parts, hide=(), state_cap: int = DEFAULT_STATE_CAP, name=None) -> Lts:
    """CCS-style ``(P1 | ... | Pn) \\ hide``.

    Complementary labels of two different parts synchronize into a
    :class:`Tau` annotated with the output label.  Labels whose port is in
    ``hide`` can only move by synchronizing; all other labels also
    interleave.  A product state is marked when any constituent is.
    """
    parts = list(parts)
    if not parts:
        raise PreconditionError("parallel_compose needs at least one part")
    hidden = _ports(hide)
    n = len(parts)
    # per part, per state: label -> targets
    index = []
    for p in parts:
        table = {}
        for s in p.states:
            by_label = defaultdict(list)
            for l, d in p.out(s):
                by_label[l].append(d)
            table[s] = by_label
        index.append(table)

    start = tuple(p.start for p in parts)
    seen = {start}
    queue = deque([start])
    transitions = []
    while queue:
        state = queue.popleft()
        succ = []
        for i in range(n):
            for label, dst in parts[i].out(state[i]):
                if isinstance(label, ActionLabel) and label.port in hidden:
                    continue
                succ.append((label, state[:i] + (dst,) + state[i + 1:]))
        for i in range(n):
            for label, targets_i in index[i][state[i]].items():
                if not isinstance(label, ActionLabel):
                    continue
                partner = label.complement()
                for j in range(i + 1, n):
                    targets_j = index[j][state[j]].get(partner)
                    if not targets_j:
                        continue
                    via = label if label.is_output else partner
                    for di in targets_i:
                        for dj in targets_j:
                            nxt = list(state)
                            nxt[i] = di
                            nxt[j] = dj
                            succ.append((Tau(via), tuple(nxt)))
        for label, nxt in succ:
            transitions.append((state, label, nxt))
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > state_cap:
                    raise StateSpaceError(state_cap)
                queue.append(nxt)
    marked = [s for s in seen if any(s[i] in parts[i].marked for i in range(n))]
    if name is None:
        name = "|".join(p.name or "?" for p in parts)
    return Lts(transitions, start, marked, name=name)


def close(parts, state_cap: int = DEFAULT_STATE_CAP, name=None) -> Lts:
    """Compose ``parts`` hiding every action they mention."""
    parts = list(parts)
    return parallel_compose(parts, all_ports(*parts), state_cap=state_cap, name=name)


def deadlock_states(lts: Lts) -> frozenset:
    return frozenset(s for s in lts.states if not lts.out(s))


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        root = x
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while x != root:
            nxt = self.parent.get(x, x)
            self.parent[x] = root
            x = nxt
        return root

    def merge_into(self, victim, survivor):
        self.parent[self.find(victim)] = self.find(survivor)


def project_onto_channels(lts: Lts, channels: Iterable[int]) -> Lts:
    """Behavior of ``lts`` restricted to ``channels``.

    1. drop self-loops labeled off the channels;
    2. contract every remaining off-channel arc ``(v, m)`` by merging ``m``
       into ``v`` (the start designation follows the survivor);
    3. while two equally labeled arcs leave one state towards different
       targets, merge the targets, keeping the lexicographically smaller id.

    Marks survive merging if any merged state was marked.  Silent steps are
    off every channel.
    """
    channels = frozenset(channels)
    if not channels:
        raise PreconditionError("project_onto_channels needs a non-empty channel set")

    def on(label):
        return isinstance(label, ActionLabel) and label.channel in channels

    def arc_key(t):
        return (state_key(t[0]), label_key(t[1]), state_key(t[2]))

    arcs = sorted((t for t in lts.transitions if not (t[0] == t[2] and not on(t[1]))),
                  key=arc_key)
    uf = _UnionFind()
    for src, label, dst in arcs:
        if on(label):
            continue
        a, b = uf.find(src), uf.find(dst)
        if a != b:
            uf.merge_into(b, a)

    arcs = {(uf.find(s), l, uf.find(d)) for s, l, d in arcs if on(l)}
    while True:
        groups = defaultdict(set)
        for s, l, d in arcs:
            groups[(s, l)].add(d)
        merged = False
        for key in sorted(groups, key=lambda k: (state_key(k[0]), label_key(k[1]))):
            targets = {uf.find(t) for t in groups[key]}
            if len(targets) > 1:
                ordered = sorted(targets, key=state_key)
                for victim in ordered[1:]:
                    uf.merge_into(victim, ordered[0])
                merged = True
        if not merged:
            break
        arcs = {(uf.find(s), l, uf.find(d)) for s, l, d in arcs}

    start = uf.find(lts.start)
    marked = {uf.find(m) for m in lts.marked}
    return Lts(arcs, start, marked, name=lts.name)


def decouple(lts: Lts, channels: Iterable[int], delta: int) -> Lts:
    """Move every label on ``channels`` onto the fresh connector ``delta``."""
    channels = frozenset(channels)
    if delta in channels or delta in lts.channels:
        raise PreconditionError(f"connector {delta} is not fresh for {lts.name or 'lts'}")
    if not channels:
        return lts
    return relabel(lts, RelabelMap.collapse_channels(channels, delta))


def flip_directions(lts: Lts) -> Lts:
    return relabel(lts, RelabelMap.direction_flip())


def traces(lts: Lts, depth: int) -> set:
    """All label sequences of length <= depth starting at ``start``."""
    result = {()}
    frontier = {((), lts.start)}
    for _ in range(depth):
        nxt = set()
        for word, s in frontier:
            for l, d in lts.out(s):
                w = word + (l,)
                result.add(w)
                nxt.add((w, d))
        frontier = nxt
    return result


def erase(word, channels) -> tuple:
    """Drop from ``word`` every symbol that is not an action on ``channels``."""
    return tuple(l for l in word if isinstance(l, ActionLabel) and l.channel in channels)


def to_digraph(lts: Lts) -> nx.DiGraph:
    g = nx.DiGraph()
    for s in lts.states:
        g.add_node(s, start=(s == lts.start), marked=(s in lts.marked))
    for s, l, d in lts.transitions:
        if g.has_edge(s, d):
            g[s][d]["labels"] = g[s][d]["labels"] | {l}
        else:
            g.add_edge(s, d, labels=frozenset({l}))
    return g


def isomorphic(a: Lts, b: Lts) -> bool:
    """Label-, start- and mark-preserving graph isomorphism."""
    if (len(a.states), len(a.transitions), len(a.marked)) != \
            (len(b.states), len(b.transitions), len(b.marked)):
        return False
    if a.labels != b.labels:
        return False
    return nx.is_isomorphic(
        to_digraph(a), to_digraph(b),
        node_match=lambda x, y: x["start"] == y["start"] and x["marked"] == y["marked"],
        edge_match=lambda x, y: x["labels"] == y["labels"],
    )
