"""Message sequence charts: parsing, instance-set expansion, LTS extraction.

Document format::

    bmsc Request
    lifeline C {Client1, Client3} @1
    lifeline WR {WR} @432/401
    msg C -> WR req request
    end
    hmsc
    start -> Request
    Request -> Request
    end

A lifeline may carry one connector, or two (``@top/bottom``) when it sits
between a coordinator side and a component side.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace

from .errors import ParseError, PreconditionError
from .lts import INPUT, OUTPUT, ActionLabel, Lts, NAME_RE

REQUEST = "request"
NOTIFICATION = "notification"
START = "start"
END = "end"

_LIFELINE_RE = re.compile(
    r"lifeline\s+(?P<id>[^\s{]+)\s*\{(?P<inst>[^}]*)\}\s*"
    r"(?:@(?P<top>\d+)(?:/(?P<bottom>\d+))?)?\s*\Z")
_MSG_RE = re.compile(
    r"msg\s+(?P<src>\S+)\s*->\s*(?P<dst>\S+)\s+(?P<name>\S+)\s+(?P<kind>request|notification)"
    r"(?:\s+@(?P<ch>\d+))?\s*\Z")
_EDGE_RE = re.compile(r"(?P<src>\S+)\s*->\s*(?P<dst>\S+)\Z")


@dataclass(frozen=True)
class Lifeline:
    id: str
    instances: tuple
    channels: tuple = ()

    def __post_init__(self):
        if not self.instances:
            raise ValueError(f"lifeline {self.id} has no instance")
        if len(self.channels) > 2:
            raise ValueError(f"lifeline {self.id} has more than two connectors")

    @property
    def instance(self) -> str:
        if len(self.instances) != 1:
            raise PreconditionError(f"lifeline {self.id} still groups {self.instances}")
        return self.instances[0]


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    name: str
    kind: str = REQUEST
    channel: int | None = None
    origin: int | None = None  # index of the message this one was cloned from


@dataclass(frozen=True)
class Bmsc:
    name: str
    lifelines: tuple
    events: tuple

    def __post_init__(self):
        ids = [l.id for l in self.lifelines]
        if len(set(ids)) != len(ids):
            raise ValueError(f"bMSC {self.name}: duplicate lifeline ids")
        owners = {}
        for l in self.lifelines:
            for inst in l.instances:
                if inst in owners:
                    raise ValueError(f"bMSC {self.name}: instance {inst} on two lifelines")
                owners[inst] = l.id
        for m in self.events:
            if m.sender == m.receiver:
                raise ValueError(f"bMSC {self.name}: message {m.name} sent to itself")
            for end in (m.sender, m.receiver):
                if end not in ids:
                    raise ValueError(f"bMSC {self.name}: unknown lifeline {end}")

    def lifeline(self, lid) -> Lifeline:
        for l in self.lifelines:
            if l.id == lid:
                return l
        raise KeyError(lid)

    def lifeline_of(self, instance) -> Lifeline | None:
        for l in self.lifelines:
            if instance in l.instances:
                return l
        return None


@dataclass(frozen=True)
class Hmsc:
    edges: tuple

    @property
    def nodes(self) -> frozenset:
        return frozenset(n for e in self.edges for n in e) - {START, END}

    def successors(self, node) -> list:
        return [d for s, d in self.edges if s == node]


@dataclass(frozen=True)
class MscDocument:
    bmscs: tuple
    hmsc: Hmsc = field(default_factory=lambda: Hmsc(()))

    def __post_init__(self):
        names = [b.name for b in self.bmscs]
        if len(set(names)) != len(names):
            raise ValueError("duplicate bMSC names")
        lifelines = {}
        for b in self.bmscs:
            for l in b.lifelines:
                seen = lifelines.setdefault(l.id, l)
                if seen != l:
                    raise ValueError(f"lifeline {l.id} declared differently across scenarios")
        for s, d in self.hmsc.edges:
            if d == START:
                raise ValueError("the HMSC start node has incoming edges")
            if s == END:
                raise ValueError("the HMSC end node has outgoing edges")
        for n in self.hmsc.nodes:
            if n not in names:
                raise ValueError(f"HMSC refers to unknown bMSC {n}")

    def bmsc(self, name) -> Bmsc:
        for b in self.bmscs:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def lifelines(self) -> dict:
        result = {}
        for b in self.bmscs:
            for l in b.lifelines:
                result.setdefault(l.id, l)
        return result

    @property
    def instances(self) -> frozenset:
        return frozenset(i for l in self.lifelines.values() for i in l.instances)

    @property
    def channels(self) -> frozenset:
        result = {c for l in self.lifelines.values() for c in l.channels}
        result |= {m.channel for b in self.bmscs for m in b.events if m.channel is not None}
        return frozenset(result)

    def lifeline_of(self, instance) -> Lifeline | None:
        for l in self.lifelines.values():
            if instance in l.instances:
                return l
        return None


def parse_msc(text: str, source=None) -> MscDocument:
    bmscs = []
    edges = []
    current = None  # (name, lifelines, events, line)
    in_hmsc = False
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split()[0]
        try:
            if current is not None:
                name, lifelines, events, first = current
                if word == "lifeline":
                    m = _LIFELINE_RE.match(line)
                    if not m:
                        raise ParseError("malformed lifeline", number, source)
                    insts = tuple(i.strip() for i in m.group("inst").split(",") if i.strip())
                    if not insts:
                        raise ParseError("lifeline without instances", number, source)
                    chans = tuple(int(c) for c in (m.group("top"), m.group("bottom")) if c)
                    lifelines.append(Lifeline(m.group("id"), insts, chans))
                elif word == "msg":
                    m = _MSG_RE.match(line)
                    if not m:
                        raise ParseError("malformed message", number, source)
                    if not NAME_RE.match(m.group("name")):
                        raise ParseError(f"bad message name {m.group('name')!r}", number, source)
                    ch = m.group("ch")
                    events.append(Message(m.group("src"), m.group("dst"), m.group("name"),
                                          m.group("kind"), int(ch) if ch else None))
                elif word == "end":
                    bmscs.append(Bmsc(name, tuple(lifelines), tuple(events)))
                    current = None
                else:
                    raise ParseError(f"unexpected {word!r} inside bmsc {name}", number, source)
            elif in_hmsc:
                if line == "end":
                    in_hmsc = False
                    continue
                m = _EDGE_RE.match(line)
                if not m:
                    raise ParseError("malformed HMSC edge", number, source)
                edges.append((m.group("src"), m.group("dst")))
            elif word == "bmsc":
                parts = line.split()
                if len(parts) != 2 or parts[1] in (START, END):
                    raise ParseError("expected 'bmsc <Name>'", number, source)
                current = (parts[1], [], [], number)
            elif line == "hmsc":
                in_hmsc = True
            else:
                raise ParseError(f"unexpected {word!r}", number, source)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), number, source) from None
    if current is not None:
        raise ParseError(f"bmsc {current[0]} is not closed", current[3], source)
    if in_hmsc:
        raise ParseError("hmsc block is not closed", None, source)
    try:
        return MscDocument(tuple(bmscs), Hmsc(tuple(edges)))
    except ValueError as exc:
        raise ParseError(str(exc), None, source) from None


def render_msc(doc: MscDocument) -> str:
    lines = []
    for b in doc.bmscs:
        lines.append(f"bmsc {b.name}")
        for l in b.lifelines:
            chans = ""
            if l.channels:
                chans = " @" + "/".join(str(c) for c in l.channels)
            lines.append(f"lifeline {l.id} {{{', '.join(l.instances)}}}{chans}")
        for m in b.events:
            suffix = f" @{m.channel}" if m.channel is not None else ""
            lines.append(f"msg {m.sender} -> {m.receiver} {m.name} {m.kind}{suffix}")
        lines.append("end")
    lines.append("hmsc")
    for s, d in doc.hmsc.edges:
        lines.append(f"{s} -> {d}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def expand_instance_sets(doc: MscDocument, first_free: int | None = None) -> MscDocument:
    """Give every lifeline exactly one instance.

    A lifeline grouping several instances is cloned once per instance.  The
    first instance keeps the lifeline's connectors; the others receive fresh
    connector ids from ``first_free`` upwards (only when the group had
    explicit connectors).  Messages touching a grouped lifeline are
    replicated for each clone.
    """
    if first_free is None:
        first_free = max(doc.channels, default=-1) + 1
    counter = itertools.count(first_free)
    clones = {}
    for lid, l in sorted(doc.lifelines.items()):
        if len(l.instances) == 1:
            continue
        group = []
        for k, inst in enumerate(l.instances):
            if k == 0 or not l.channels:
                chans = l.channels
            else:
                chans = tuple(next(counter) for _ in l.channels)
            group.append(Lifeline(f"{lid}[{inst}]", (inst,), chans))
        clones[lid] = group
    if not clones:
        return doc
    bmscs = []
    for b in doc.bmscs:
        lifelines = []
        for l in b.lifelines:
            lifelines.extend(clones.get(l.id, [l]))
        events = []
        for idx, m in enumerate(b.events):
            senders = [c.id for c in clones.get(m.sender, [])] or [m.sender]
            receivers = [c.id for c in clones.get(m.receiver, [])] or [m.receiver]
            origin = idx if m.origin is None else m.origin
            for s, r in itertools.product(senders, receivers):
                events.append(replace(m, sender=s, receiver=r, origin=origin))
        bmscs.append(Bmsc(b.name, tuple(lifelines), tuple(events)))
    return MscDocument(tuple(bmscs), doc.hmsc)


def assign_channels(doc: MscDocument, first_free: int, known=None, two_sided=()) -> MscDocument:
    """Fill in the connectors of lifelines declared without ``@``.

    ``known`` maps instance names to connectors they already own;
    lifelines listed in ``two_sided`` get a (top, bottom) pair.
    """
    known = dict(known or {})
    counter = itertools.count(first_free)
    chosen = {}
    for lid, l in sorted(doc.lifelines.items()):
        if l.channels:
            continue
        if lid in two_sided:
            chosen[lid] = (next(counter), next(counter))
        elif len(l.instances) == 1 and l.instance in known:
            chosen[lid] = (known[l.instance],)
        else:
            chosen[lid] = (next(counter),)
    if not chosen:
        return doc
    bmscs = []
    for b in doc.bmscs:
        lifelines = tuple(replace(l, channels=chosen.get(l.id, l.channels)) for l in b.lifelines)
        bmscs.append(Bmsc(b.name, lifelines, b.events))
    return MscDocument(tuple(bmscs), doc.hmsc)


def _channel(lifeline: Lifeline, peer: str, top_peers) -> int:
    if not lifeline.channels:
        raise PreconditionError(f"lifeline {lifeline.id} has no connector")
    if len(lifeline.channels) == 1:
        return lifeline.channels[0]
    top, bottom = lifeline.channels
    return top if peer in top_peers else bottom


def project_bmsc(b: Bmsc, instance: str, top_peers=()) -> list:
    """Labels ``instance`` performs in ``b``, in order."""
    life = b.lifeline_of(instance)
    if life is None:
        return []
    if len(life.instances) != 1:
        raise PreconditionError(f"expand instance sets before projecting on {instance}")
    labels = []
    last_origin = None
    for idx, m in enumerate(b.events):
        if life.id not in (m.sender, m.receiver):
            continue
        origin = idx if m.origin is None else m.origin
        if origin == last_origin:
            continue  # replica of the message just projected
        last_origin = origin
        peer = m.receiver if m.sender == life.id else m.sender
        channel = m.channel if m.channel is not None else _channel(life, peer, top_peers)
        direction = OUTPUT if m.sender == life.id else INPUT
        labels.append(ActionLabel(direction, m.name, channel))
    return labels


def msc_to_lts(doc: MscDocument, instance: str, top_peers=(), name: str | None = None) -> Lts:
    """Behavior of ``instance`` along every HMSC path.

    Each HMSC node contributes the instance's projected event chain; after
    the last event of a node, the first event of every successor node
    (skipping nodes where the instance is silent) is enabled.
    """
    if instance not in doc.instances:
        raise PreconditionError(f"instance {instance} occurs in no scenario")
    proj = {b.name: project_bmsc(b, instance, top_peers) for b in doc.bmscs}
    if not any(proj.values()):
        raise PreconditionError(f"instance {instance} takes part in no message")

    def entries(node):
        """Non-silent nodes reachable from ``node``'s exit through silent ones."""
        found = []
        seen = set()
        stack = list(reversed(doc.hmsc.successors(node)))
        while stack:
            m = stack.pop()
            if m == END or m in seen:
                continue
            seen.add(m)
            if proj[m]:
                found.append(m)
            else:
                stack.extend(reversed(doc.hmsc.successors(m)))
        return found

    start = "q0"
    transitions = []
    exits = {START: start}
    for node in sorted(doc.hmsc.nodes):
        events = proj[node]
        if events:
            exits[node] = f"{node}.{len(events)}"
            for i in range(1, len(events)):
                transitions.append((f"{node}.{i}", events[i], f"{node}.{i + 1}"))
    for node, state in exits.items():
        for m in entries(node):
            transitions.append((state, proj[m][0], f"{m}.1"))
    return Lts(transitions, start, name=name or instance)
