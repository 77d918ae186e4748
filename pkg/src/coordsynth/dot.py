"""Graphviz DOT rendering of LTS and Büchi automata."""
from __future__ import annotations

from .buchi import BuchiProperty
from .lts import Lts, state_key


def _quote(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(obj, name: str | None = None) -> str:
    """Start state gets an incoming stub; marked/accepting states are filled."""
    if isinstance(obj, BuchiProperty):
        filled = obj.accepting
        edges = obj.sorted_transitions()
    elif isinstance(obj, Lts):
        filled = obj.marked
        edges = obj.sorted_transitions()
    else:
        raise TypeError(f"cannot draw {type(obj).__name__}")
    ids = {s: f"n{i}" for i, s in enumerate(sorted(obj.states, key=state_key))}
    lines = [f"digraph {_quote(name or obj.name or 'G')} {{", "  rankdir=LR;",
             '  __start [shape=point, label=""];']
    for s in sorted(obj.states, key=state_key):
        style = ", style=filled, fillcolor=lightgrey" if s in filled else ""
        lines.append(f"  {ids[s]} [shape=circle, label={_quote(s)}{style}];")
    lines.append(f"  __start -> {ids[obj.start]};")
    for src, label, dst in edges:
        lines.append(f"  {ids[src]} -> {ids[dst]} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
