"""Line-oriented text formats for LTS and Büchi files.

::

    lts Client1
    start S4
    marked S4            # optional
    S4 !req_1 S5

Büchi files use the header ``buchi <Name>`` and ``accepting <id> ...``
instead of ``marked``; their labels may be negative (``!-req_2``) or the
universal action (``?true_`` / ``!true_``).
"""
from __future__ import annotations

import re
from pathlib import Path

from .buchi import BuchiProperty, EdgeGuard
from .errors import ParseError
from .lts import ActionLabel, Lts, Tau

LABEL_RE = re.compile(r"([!?])(-?)([A-Za-z][A-Za-z0-9]*)_(\d*)\Z")
TAU_RE = re.compile(r"tau(?::(\S+))?\Z")
ID_RE = re.compile(r"[^\s#]+\Z")


def _tokens(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def parse_guard(token: str, *, line=None, source=None) -> EdgeGuard:
    m = LABEL_RE.match(token)
    if not m:
        raise ParseError(f"malformed label {token!r}", line, source)
    direction, negative, name, channel = m.groups()
    if channel == "":
        if name != "true" or negative:
            raise ParseError(f"label {token!r} lacks a channel", line, source)
        return EdgeGuard.universal()
    label = ActionLabel(direction, name, int(channel))
    return EdgeGuard.negative(label) if negative else EdgeGuard.concrete(label)


def parse_label(token: str, *, line=None, source=None):
    """Label of a component/coordinator file: concrete actions and ``tau``."""
    t = TAU_RE.match(token)
    if t:
        via = t.group(1)
        if via is None:
            return Tau()
        return Tau(parse_label(via, line=line, source=source))
    guard = parse_guard(token, line=line, source=source)
    if not guard.is_concrete:
        raise ParseError(f"negative or universal label {token!r} not allowed in an LTS",
                         line, source)
    return guard.label


def _parse(text, kind, source):
    header = None
    start = None
    flagged = []
    transitions = []
    flag_word = "marked" if kind == "lts" else "accepting"
    for number, words in _tokens(text):
        head = words[0]
        if header is None:
            if head != kind or len(words) != 2:
                raise ParseError(f"expected '{kind} <Name>' header", number, source)
            header = words[1]
            continue
        if head == "start":
            if len(words) != 2 or start is not None:
                raise ParseError("expected a single 'start <stateId>' line", number, source)
            start = words[1]
        elif head == flag_word:
            flagged.extend(words[1:])
        elif len(words) == 3:
            src, token, dst = words
            if kind == "lts":
                label = parse_label(token, line=number, source=source)
            else:
                label = parse_guard(token, line=number, source=source)
            transitions.append((src, label, dst))
        else:
            raise ParseError(f"cannot parse line: {' '.join(words)}", number, source)
    if header is None:
        raise ParseError(f"empty file, expected '{kind} <Name>'", None, source)
    if start is None:
        raise ParseError("missing 'start' line", None, source)
    return header, start, flagged, transitions


def parse_lts(text: str, source=None) -> Lts:
    name, start, marked, transitions = _parse(text, "lts", source)
    return Lts(transitions, start, marked, name=name)


def parse_buchi(text: str, source=None) -> BuchiProperty:
    name, start, accepting, transitions = _parse(text, "buchi", source)
    return BuchiProperty(transitions, start, accepting, name=name)


def parse_any(text: str, source=None):
    for _, words in _tokens(text):
        if words[0] == "buchi":
            return parse_buchi(text, source)
        return parse_lts(text, source)
    raise ParseError("empty file", None, source)


def _printable(lts):
    if all(isinstance(s, str) and ID_RE.match(s) for s in lts.states):
        return lts
    return lts.renumbered()


def render_lts(lts: Lts, name: str | None = None) -> str:
    lts = _printable(lts)
    lines = [f"lts {name or lts.name or 'L'}", f"start {lts.start}"]
    if lts.marked:
        lines.append("marked " + " ".join(sorted(lts.marked, key=_natural)))
    for src, label, dst in lts.sorted_transitions():
        lines.append(f"{src} {label} {dst}")
    return "\n".join(lines) + "\n"


def render_buchi(b: BuchiProperty, name: str | None = None) -> str:
    ids = {}
    if not all(isinstance(s, str) and ID_RE.match(s) for s in b.states):
        ids = {s: f"B{i}" for i, s in enumerate(sorted(b.states, key=repr))}
    rn = lambda s: ids.get(s, s)  # noqa: E731
    lines = [f"buchi {name or b.name or 'P'}", f"start {rn(b.start)}"]
    if b.accepting:
        lines.append("accepting " + " ".join(sorted((rn(s) for s in b.accepting), key=_natural)))
    for src, guard, dst in b.sorted_transitions():
        if not (guard.is_concrete or guard.is_universal or guard.is_negative):
            raise ValueError(f"guard {guard} has no file syntax")
        lines.append(f"{rn(src)} {guard} {rn(dst)}")
    return "\n".join(lines) + "\n"


def _natural(s):
    return (len(s), s)


def render(obj) -> str:
    if isinstance(obj, BuchiProperty):
        return render_buchi(obj)
    return render_lts(obj)


def read_file(path):
    path = Path(path)
    return parse_any(path.read_text(encoding="utf-8"), source=str(path))


def read_lts(path) -> Lts:
    path = Path(path)
    return parse_lts(path.read_text(encoding="utf-8"), source=str(path))


def read_buchi(path) -> BuchiProperty:
    path = Path(path)
    return parse_buchi(path.read_text(encoding="utf-8"), source=str(path))


def write_file(path, obj):
    Path(path).write_text(render(obj), encoding="utf-8")
