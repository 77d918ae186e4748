"""Assume-guarantee check that an enhancement keeps an enforced property.

The original coordinator, restricted to the affected connectors and moved
onto δ, is read from the bridge's point of view (directions flipped) and
becomes the assumption ``A``.  The bridge K″ restricted to δ must never
leave ``A``: ``L(K″δ) ∩ L(¬A) = ∅``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .buchi import (ALL_ACCEPTING, BuchiProperty, EdgeGuard, Verdict,
                    complement, is_empty, lts_to_buchi, model_check, product)
from .errors import PreconditionError
from .lts import (DEFAULT_STATE_CAP, ActionLabel, Lts, RelabelMap, close, decouple,
                  flip_directions, project_onto_channels)

CONSISTENT = "consistent"
VACUOUS = "vacuous"
POSSIBLY_INCONSISTENT = "possibly inconsistent"


@dataclass(frozen=True)
class ConsistencyReport:
    property_name: str
    channels: frozenset
    delta: int
    verdict: Verdict | None
    status: str

    @property
    def ok(self) -> bool:
        return self.status != POSSIBLY_INCONSISTENT

    def row(self) -> list:
        chans = ",".join(str(c) for c in sorted(self.channels)) or "-"
        witness = "" if self.verdict is None or self.verdict.empty else self.verdict.describe()
        return [self.property_name, chans, str(self.delta), self.status, witness]


def relevant_channels(prop: BuchiProperty, affected) -> frozenset:
    return prop.channels & frozenset(affected)


def build_assumption(k: Lts, channels, delta: int) -> BuchiProperty:
    channels = frozenset(channels)
    if not channels:
        raise PreconditionError("an assumption needs at least one connector")
    sub = project_onto_channels(k, channels)
    a = flip_directions(decouple(sub, channels, delta))
    return lts_to_buchi(a.with_name("Assumption"), ALL_ACCEPTING)


def check_consistency(kpp: Lts, delta: int, assumption: BuchiProperty,
                      state_cap: int = DEFAULT_STATE_CAP) -> Verdict:
    """Empty verdict iff every run of K″ on δ stays inside the assumption."""
    kpp_delta = project_onto_channels(kpp, {delta})
    sigma = kpp_delta.action_labels | {l for l in assumption.alphabet
                                       if isinstance(l, ActionLabel)}
    return is_empty(product(lts_to_buchi(kpp_delta, ALL_ACCEPTING),
                            complement(assumption, sigma, state_cap), state_cap))


def check_property(k: Lts, kpp: Lts, prop: BuchiProperty, affected, delta: int,
                   state_cap: int = DEFAULT_STATE_CAP) -> ConsistencyReport:
    channels = relevant_channels(prop, affected)
    if not channels:
        return ConsistencyReport(prop.name, channels, delta, None, VACUOUS)
    verdict = check_consistency(kpp, delta, build_assumption(k, channels, delta), state_cap)
    status = CONSISTENT if verdict.empty else POSSIBLY_INCONSISTENT
    return ConsistencyReport(prop.name, channels, delta, verdict, status)


def relabel_property(prop: BuchiProperty, mapping: RelabelMap) -> BuchiProperty:
    def move(g):
        if g.is_concrete:
            return EdgeGuard.concrete(mapping(g.label))
        return EdgeGuard(g.kind, None, frozenset(mapping(x) for x in g.excluded))

    return BuchiProperty(((s, move(g), d) for s, g, d in prop.transitions),
                         prop.start, prop.accepting, name=prop.name)


def decoupled_property(prop: BuchiProperty, affected, delta: int) -> BuchiProperty:
    """The property as the original coordinator sees it after decoupling."""
    affected = frozenset(affected)
    return relabel_property(prop, RelabelMap.collapse_channels(affected, delta))


def theorem_oracle(k: Lts, kpp: Lts, prop: BuchiProperty, affected, delta: int,
                   state_cap: int = DEFAULT_STATE_CAP) -> Verdict:
    """Model-check the conclusion ``(K[f] | K″δ) ⊨ P`` directly.

    The two sides synchronize on δ; ``K[f]``'s other connectors stay open
    and behave as an unconstrained environment.
    """
    kf = decouple(k, affected, delta)
    kpp_delta = project_onto_channels(kpp, {delta})
    closed = close([kf, _open_environment(kf, delta), kpp_delta], state_cap=state_cap)
    return model_check(closed, decoupled_property(prop, affected, delta), state_cap)


def _open_environment(k: Lts, delta: int) -> Lts:
    """One-state process offering the complement of every non-δ label of ``k``."""
    loops = [("E", l.complement(), "E") for l in k.action_labels if l.channel != delta]
    return Lts(loops, "E", name="Env")
