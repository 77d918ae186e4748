"""Seeded random walk over a closed system, standing in for generated glue code."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .buchi import observed
from .lts import Lts


@dataclass(frozen=True)
class Step:
    event: object
    state: object
    marked: bool


@dataclass(frozen=True)
class SimulationResult:
    steps: tuple
    deadlocked: bool

    @property
    def trace(self) -> list:
        return [s.event for s in self.steps]

    @property
    def marked_visits(self) -> int:
        return sum(1 for s in self.steps if s.marked)


def simulate(closed: Lts, steps: int, seed: int = 0) -> SimulationResult:
    """Walk ``steps`` transitions, choosing uniformly among enabled ones.

    Hidden synchronizations are reported by the message they carry.  The
    walk stops early when it reaches a state without successors.
    """
    rng = random.Random(seed)
    state = closed.start
    taken = []
    for _ in range(steps):
        enabled = closed.out(state)
        if not enabled:
            return SimulationResult(tuple(taken), True)
        label, state = rng.choice(enabled)
        taken.append(Step(observed(label), state, state in closed.marked))
    return SimulationResult(tuple(taken), not closed.out(state))
