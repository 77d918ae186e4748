"""Failure-free coordinator synthesis.

The no-op coordinator mirrors the components: whenever a component can
send ``!a_i`` it accepts ``?a_i`` and then forwards ``!a_j`` to a component
able to consume ``a`` on its connector ``j``.  Its states record, per
component, the set of states the component may be in, so it is
deterministic by construction.

:func:`enforce` refines that coordinator with a monitor per property, drops
every step the monitors reject, and then prunes coordinator states that
take part in a deadlock of the closed system until none is left.
"""
from __future__ import annotations

import logging
from collections import deque

from .buchi import normalize_property, violation_monitor
from .errors import (ChannelMismatchError, PreconditionError, StateSpaceError,
                     SynthesisError)
from .lts import (DEFAULT_STATE_CAP, INPUT, ActionLabel, Lts, close,
                  deadlock_states, event_of, state_key)
from .system import CBA, Component, SystemModel, coordinator_channels

log = logging.getLogger(__name__)


def _as_components(components):
    result = []
    for c in components:
        if isinstance(c, Component):
            result.append(c)
        else:
            name, lts, channel = c
            result.append(Component(name, lts, channel))
    channels = [c.channel for c in result]
    if len(set(channels)) != len(channels):
        raise PreconditionError(f"component connectors are not distinct: {channels}")
    return result


def _post(lts: Lts, states, label) -> tuple:
    return tuple(sorted({d for s in states for l, d in lts.out(s) if l == label},
                        key=state_key))


def _check_matched(components):
    inputs = {l.name for c in components for l in c.lts.action_labels if not l.is_output}
    for c in components:
        for l in sorted(c.lts.action_labels, key=str):
            if l.is_output:
                consumers = [d for d in components if d is not c and
                             any(x.name == l.name and not x.is_output for x in d.lts.action_labels)]
                if l.name not in inputs or not consumers:
                    raise SynthesisError(f"no component consumes {l} sent by {c.name}")


def synthesize_noop(components, state_cap: int = DEFAULT_STATE_CAP) -> Lts:
    """Coordinator that forwards every message between the components."""
    comps = _as_components(components)
    _check_matched(comps)
    n = len(comps)

    def consumers(sets, sender, name):
        found = []
        for j in range(n):
            if j == sender:
                continue
            label = ActionLabel(INPUT, name, comps[j].channel)
            nxt = _post(comps[j].lts, sets[j], label)
            if nxt:
                found.append((j, label.complement(), nxt))
        return found

    start = (tuple((c.lts.start,) for c in comps), None)
    seen = {start}
    queue = deque([start])
    transitions = []

    def add(src, label, dst):
        transitions.append((src, label, dst))
        if dst not in seen:
            seen.add(dst)
            if len(seen) > state_cap:
                raise StateSpaceError(state_cap)
            queue.append(dst)

    while queue:
        sets, pending = state = queue.popleft()
        if pending is None:
            for i, c in enumerate(comps):
                sends = sorted({l for s in sets[i] for l, _ in c.lts.out(s)
                                if isinstance(l, ActionLabel) and l.is_output}, key=str)
                for label in sends:
                    if not consumers(sets, i, label.name):
                        continue
                    advanced = sets[:i] + (_post(c.lts, sets[i], label),) + sets[i + 1:]
                    add(state, label.complement(), (advanced, (i, label.name)))
        else:
            sender, name = pending
            for j, out_label, nxt in consumers(sets, sender, name):
                advanced = sets[:j] + (nxt,) + sets[j + 1:]
                add(state, out_label, (advanced, None))
    return Lts(transitions, start, name="noop").renumbered("N", name="noop")


def _trace_to(lts: Lts, targets) -> list:
    """Shortest label sequence from the start to any state in ``targets``."""
    parent = {lts.start: None}
    queue = deque([lts.start])
    while queue:
        s = queue.popleft()
        if s in targets:
            trace = []
            while parent[s] is not None:
                prev, label = parent[s]
                trace.append(label)
                s = prev
            return trace[::-1]
        for label, d in lts.out(s):
            if d not in parent:
                parent[d] = (s, label)
                queue.append(d)
    return []


def _monitored(noop: Lts, properties, state_cap):
    """Product of the coordinator with one subset monitor per property."""
    events = {l.as_output() for l in noop.action_labels}
    monitors = []
    for p in properties:
        sat, _ = violation_monitor(p, events)
        monitors.append((sat, normalize_property(p)))

    def step(sets, label):
        e = label.as_output()
        out = []
        for (sat, _), current in zip(monitors, sets):
            nxt = tuple(sorted({d for s in current for d in sat.successors(s, e)}, key=state_key))
            if not nxt:
                return None
            out.append(nxt)
        return tuple(out)

    def observed_accepting(sets_before, label, sets_after):
        if not monitors:
            return False
        _, pn = monitors[-1]
        e = label.as_output()
        named = any(pn.successors(s, e) for s in sets_before[-1])
        return named and any(s in pn.accepting for s in sets_after[-1])

    start = (noop.start, tuple((p.start,) for p in properties))
    seen = {start}
    queue = deque([start])
    transitions = []
    marked = set()
    while queue:
        k, sets = state = queue.popleft()
        for label, k2 in noop.out(k):
            nxt_sets = step(sets, label)
            if nxt_sets is None:
                continue
            nxt = (k2, nxt_sets)
            transitions.append((state, label, nxt))
            if observed_accepting(sets, label, nxt_sets):
                marked.add(nxt)
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > state_cap:
                    raise StateSpaceError(state_cap)
                queue.append(nxt)
    return Lts(transitions, start, marked, name="K")


def enforce(noop: Lts, components, properties=(), state_cap: int = DEFAULT_STATE_CAP,
            step_budget: int | None = None, name: str = "K") -> Lts:
    """Restrict ``noop`` to a deadlock-free coordinator satisfying ``properties``.

    Raises :class:`SynthesisError` when pruning removes the start state; the
    error carries the closed-system trace into the last deadlock found.
    """
    comps = _as_components(components)
    properties = list(properties)
    k = _monitored(noop, properties, state_cap)
    steps = 0
    while True:
        closed = close([c.lts for c in comps] + [k], state_cap=state_cap)
        dead = deadlock_states(closed)
        if not dead:
            break
        bad = {s[-1] for s in dead}
        if k.start in bad:
            trace = [event_of(l) for l in _trace_to(closed, dead)]
            raise SynthesisError(
                "no failure-free coordinator exists; last deadlock after: "
                + (" ".join(str(e) for e in trace) or "ε"), counterexample=trace)
        k = Lts([t for t in k.transitions if t[0] not in bad and t[2] not in bad],
                k.start, k.marked, name=k.name)
        steps += 1
        log.debug("pruning round %d removed %d coordinator states", steps, len(bad))
        if step_budget is not None and steps >= step_budget:
            raise SynthesisError(f"pruning step budget of {step_budget} exhausted")
    return k.renumbered("K", name=name)


def build_cba(components, coordinator) -> SystemModel:
    comps = _as_components(components)
    extra = coordinator_channels(coordinator, external_only=True) - {c.channel for c in comps}
    if extra:
        raise ChannelMismatchError(f"coordinator connectors {sorted(extra)} match no component")
    return SystemModel(tuple(comps), coordinator, CBA)


def synthesize(system: SystemModel, properties=(), state_cap: int = DEFAULT_STATE_CAP,
               step_budget: int | None = None) -> SystemModel:
    """No-op coordinator, enforcement and CBA assembly in one call."""
    noop = synthesize_noop(system.components, state_cap)
    k = enforce(noop, system.components, properties, state_cap, step_budget)
    return build_cba(system.components, k)
