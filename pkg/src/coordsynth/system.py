"""System models: components bound to connectors plus an optional coordinator.

A coordinator is either a plain :class:`Lts` or a
:class:`CompositeCoordinator`, the structured result of an enhancement
(the original coordinator relabeled, the wrapper, and the two bridging
coordinators, with their private connectors hidden).  Composites nest, so
an enhanced coordinator can itself be enhanced again.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import ChannelMismatchError, PreconditionError
from .lts import (DEFAULT_STATE_CAP, ActionLabel, Lts, RelabelMap, close,
                  parallel_compose, relabel)

CFA = "CFA"
CBA = "CBA"


@dataclass(frozen=True)
class Component:
    name: str
    lts: Lts
    channel: int

    def __post_init__(self):
        stray = sorted({l.channel for l in self.lts.action_labels} - {self.channel})
        if stray:
            raise ChannelMismatchError(
                f"component {self.name} bound to connector {self.channel} "
                f"uses connector(s) {stray}")


@dataclass(frozen=True)
class EnhancementInfo:
    """Bookkeeping for one applied enhancement."""

    name: str
    delta: int
    affected: frozenset
    wrapper: str
    top: int
    bottom: int


@dataclass(frozen=True)
class Part:
    name: str
    coordinator: "Coordinator"
    relabel: tuple = ()  # (old channel, new channel) pairs

    @property
    def channel_map(self) -> dict:
        return dict(self.relabel)


@dataclass(frozen=True)
class CompositeCoordinator:
    parts: tuple
    hide_channels: frozenset
    enhancement: EnhancementInfo | None = None

    def part(self, name) -> Part:
        for p in self.parts:
            if p.name == name:
                return p
        raise KeyError(name)

    def flatten(self, state_cap: int = DEFAULT_STATE_CAP) -> Lts:
        ltss = []
        for p in self.parts:
            lts = coordinator_lts(p.coordinator, state_cap)
            if p.relabel:
                lts = relabel(lts, RelabelMap.channel_map(p.channel_map))
            ltss.append(lts.with_name(p.name))
        hide = {l.port for lts in ltss for l in lts.action_labels
                if l.channel in self.hide_channels}
        return parallel_compose(ltss, hide, state_cap=state_cap, name="Knew")


Coordinator = Union[Lts, CompositeCoordinator]


def coordinator_lts(coordinator: Coordinator, state_cap: int = DEFAULT_STATE_CAP) -> Lts:
    if isinstance(coordinator, CompositeCoordinator):
        return coordinator.flatten(state_cap)
    return coordinator


def coordinator_channels(coordinator: Coordinator, external_only: bool = False) -> frozenset:
    """Connectors a coordinator uses; internal ones only when not ``external_only``."""
    if isinstance(coordinator, Lts):
        return coordinator.channels
    result = set()
    for p in coordinator.parts:
        mapping = p.channel_map
        for c in coordinator_channels(p.coordinator, external_only):
            result.add(mapping.get(c, c))
    if external_only:
        return frozenset(result - coordinator.hide_channels)
    return frozenset(result | coordinator.hide_channels)


@dataclass(frozen=True)
class SystemModel:
    components: tuple
    coordinator: Coordinator | None = None
    kind: str = field(default=CFA)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        channels = [c.channel for c in self.components]
        if len(set(channels)) != len(channels):
            raise ChannelMismatchError(f"component connectors are not distinct: {channels}")
        names = [c.name for c in self.components]
        if len(set(names)) != len(names):
            raise PreconditionError(f"component names are not distinct: {names}")
        if self.kind not in (CFA, CBA):
            raise ValueError(f"unknown system kind {self.kind!r}")
        if self.kind == CBA:
            if self.coordinator is None:
                raise PreconditionError("a CBA needs a coordinator")
            extra = coordinator_channels(self.coordinator, external_only=True) - set(channels)
            if extra:
                raise ChannelMismatchError(
                    f"coordinator uses connectors {sorted(extra)} with no component")

    def component(self, name) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def component_channels(self) -> frozenset:
        return frozenset(c.channel for c in self.components)

    @property
    def channels(self) -> frozenset:
        result = set(self.component_channels)
        for c in self.components:
            result |= c.lts.channels
        if self.coordinator is not None:
            result |= coordinator_channels(self.coordinator)
        return frozenset(result)

    def coordinator_lts(self, state_cap: int = DEFAULT_STATE_CAP) -> Lts:
        if self.coordinator is None:
            raise PreconditionError("system has no coordinator")
        return coordinator_lts(self.coordinator, state_cap)

    def closed_lts(self, state_cap: int = DEFAULT_STATE_CAP) -> Lts:
        """The closed composition with every action hidden."""
        if self.kind == CFA:
            return self.cfa_closed_lts(state_cap)
        parts = [c.lts for c in self.components] + [self.coordinator_lts(state_cap)]
        return close(parts, state_cap=state_cap, name="closed")

    def cfa_closed_lts(self, state_cap: int = DEFAULT_STATE_CAP) -> Lts:
        """Components talking directly over the shared connector 0."""
        parts = [relabel(c.lts, RelabelMap.channel_substitution(c.channel, 0))
                 for c in self.components]
        return close(parts, state_cap=state_cap, name="CFA")


def fresh_channel_id(system: SystemModel | None, *others) -> int:
    """One more than the largest connector id used anywhere; 0 if none."""
    used = set()
    if system is not None:
        used |= system.channels
    for other in others:
        if isinstance(other, int):
            used.add(other)
        elif isinstance(other, ActionLabel):
            used.add(other.channel)
        elif hasattr(other, "channels"):
            used |= set(other.channels)
        else:
            used |= set(other)
    return max(used) + 1 if used else 0
