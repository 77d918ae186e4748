"""Inserting a wrapper between a coordinator and some of its components.

Given a CBA ``S`` with coordinator ``K`` and an MSC description of the
wrapper ``W``, the pipeline

1. restricts ``K`` to the affected connectors and moves them onto a fresh
   connector δ (the sub-coordinator the wrapper talks to),
2. derives ``W``, new components and ``W``'s two interface views from the MSCs,
3. synthesizes K″ (sub-coordinator side) and K′ (component side),
4. checks every enforced property with the assume-guarantee rule,

and returns ``S′`` whose coordinator is ``K[f] | W | K′ | K″`` with the
private connectors hidden.  ``S`` itself is never modified.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .consistency import check_property, decoupled_property
from .errors import InconsistentEnhancementError, PreconditionError
from .lts import DEFAULT_STATE_CAP, Lts, decouple, project_onto_channels
from .msc import MscDocument, assign_channels, expand_instance_sets, msc_to_lts
from .synthesis import enforce, synthesize_noop
from .system import (CBA, Component, CompositeCoordinator, EnhancementInfo, Part,
                     SystemModel, fresh_channel_id)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnhancementSpec:
    doc: MscDocument
    wrapper: str
    affected: frozenset
    new_components: tuple | None = None  # inferred when None
    subcoordinator: str | None = None  # lifeline id, inferred when None
    name: str = "E"

    def __post_init__(self):
        object.__setattr__(self, "affected", frozenset(self.affected))
        if not self.affected:
            raise PreconditionError("an enhancement must affect at least one connector")
        if self.wrapper not in self.doc.instances:
            raise PreconditionError(f"wrapper {self.wrapper} does not occur in the document")


@dataclass(frozen=True)
class EnhancementResult:
    system: SystemModel
    delta: int
    top: int
    bottom: int
    ksub: Lts
    ksub_decoupled: Lts
    wrapper: Lts
    w_top: Lts
    w_bottom: Lts
    kprime: Lts
    kdoubleprime: Lts
    new_components: tuple
    reports: tuple = field(default=())
    doc: MscDocument | None = None

    def artifacts(self) -> dict:
        """Derived behaviors keyed by the file stem they are saved under."""
        out = {"Ksub": self.ksub, "Ksub_decoupled": self.ksub_decoupled,
               "W": self.wrapper, "W_TOP": self.w_top, "W_BOTTOM": self.w_bottom,
               "Kp": self.kprime, "Kpp": self.kdoubleprime}
        for c in self.new_components:
            out[c.name] = c.lts
        return out


def sub_coordinator(k: Lts, channels) -> Lts:
    channels = frozenset(channels)
    stray = channels - k.channels
    if stray:
        raise PreconditionError(f"coordinator does not use connector(s) {sorted(stray)}")
    return project_onto_channels(k, channels).with_name("Ksub")


def derive_wrapper_views(w: Lts, top: int, bottom: int) -> tuple:
    stray = w.channels - {top, bottom}
    if stray:
        raise PreconditionError(f"wrapper uses connector(s) {sorted(stray)} besides {top}/{bottom}")
    return (project_onto_channels(w, {top}).with_name("W_TOP"),
            project_onto_channels(w, {bottom}).with_name("W_BOTTOM"))


def synthesize_bridges(ksub_decoupled: Lts, w_top: Lts, w_bottom: Lts,
                       affected_components, new_components,
                       state_cap: int = DEFAULT_STATE_CAP) -> tuple:
    """Return ``(K′, K″)``; both are failure-free coordinators of their side."""
    (delta,) = ksub_decoupled.channels or {None}
    (top,) = w_top.channels or {None}
    (bottom,) = w_bottom.channels or {None}
    if delta is None or top is None:
        raise PreconditionError("the sub-coordinator and the wrapper top view must not be empty")
    upper = [Component("Ksub", ksub_decoupled, delta), Component("W_TOP", w_top, top)]
    lower = [Component(c.name, c.lts, c.channel)
             for c in list(affected_components) + list(new_components)]
    if bottom is not None:
        lower.insert(0, Component("W_BOTTOM", w_bottom, bottom))
    kpp = enforce(synthesize_noop(upper, state_cap), upper, (), state_cap, name="Kpp")
    kp = enforce(synthesize_noop(lower, state_cap), lower, (), state_cap, name="Kp")
    return kp, kpp


def _subcoordinator_lifeline(doc: MscDocument, spec: EnhancementSpec, system, new) -> str:
    if spec.subcoordinator is not None:
        if spec.subcoordinator not in doc.lifelines:
            raise PreconditionError(f"no lifeline {spec.subcoordinator} in the document")
        return spec.subcoordinator
    known = {c.name for c in system.components} | set(new) | {spec.wrapper}
    candidates = sorted(lid for lid, l in doc.lifelines.items()
                        if not set(l.instances) & known)
    if len(candidates) != 1:
        raise PreconditionError(
            f"cannot tell the sub-coordinator lifeline among {candidates}; name it explicitly")
    return candidates[0]


def _new_components(doc: MscDocument, spec: EnhancementSpec, system) -> tuple:
    if spec.new_components is not None:
        missing = set(spec.new_components) - doc.instances
        if missing:
            raise PreconditionError(f"new components {sorted(missing)} do not occur in the document")
        return tuple(spec.new_components)
    names = {c.name for c in system.components}
    # an unknown instance grouped with an existing component behaves like it
    found = set()
    for l in doc.lifelines.values():
        if set(l.instances) & names:
            found |= set(l.instances) - names
    return tuple(sorted(found))


def coordinator_of(system: SystemModel, state_cap: int = DEFAULT_STATE_CAP) -> Lts:
    return system.coordinator_lts(state_cap)


def apply_enhancement(system: SystemModel, spec: EnhancementSpec, properties=(),
                      state_cap: int = DEFAULT_STATE_CAP, kpp_override: Lts | None = None,
                      check: bool = True) -> EnhancementResult:
    """Build ``S′``; raise :class:`InconsistentEnhancementError` if a check fails."""
    if system.kind != CBA:
        raise PreconditionError("only a coordinator-based system can be enhanced")
    stray = spec.affected - system.component_channels
    if stray:
        raise PreconditionError(f"affected connectors {sorted(stray)} belong to no component")

    k = coordinator_of(system, state_cap)
    new_names = _new_components(spec.doc, spec, system)
    sub_lid = _subcoordinator_lifeline(spec.doc, spec, system, new_names)

    # connectors: explicit annotations first, then fresh ids above everything in use
    raw = spec.doc
    first_free = fresh_channel_id(system, raw.channels)
    known = {c.name: c.channel for c in system.components}
    wrapper_lid = raw.lifeline_of(spec.wrapper).id
    doc = assign_channels(raw, first_free, known, two_sided={wrapper_lid})
    doc = expand_instance_sets(doc, fresh_channel_id(system, doc.channels))

    wrapper_life = doc.lifeline_of(spec.wrapper)
    if len(wrapper_life.channels) != 2:
        raise PreconditionError(f"wrapper lifeline {wrapper_life.id} needs two connectors")
    top, bottom = wrapper_life.channels
    sub_life = doc.lifelines[sub_lid]
    delta = sub_life.channels[0]
    if delta in system.channels:
        raise PreconditionError(f"connector {delta} for the sub-coordinator is already in use")

    w = msc_to_lts(doc, spec.wrapper, top_peers={sub_lid}, name="W")
    new_components = []
    for name in new_names:
        lts = msc_to_lts(doc, name)
        channel = doc.lifeline_of(name).channels[0]
        new_components.append(Component(name, lts, channel))
    taken = {c.channel for c in new_components} & (system.component_channels | {top, bottom, delta})
    if taken:
        raise PreconditionError(f"new components reuse connector(s) {sorted(taken)}")

    ksub = sub_coordinator(k, spec.affected)
    ksub_dec = decouple(ksub, spec.affected, delta).with_name("Ksub_decoupled")
    w_top, w_bottom = derive_wrapper_views(w, top, bottom)
    affected_components = [c for c in system.components if c.channel in spec.affected]
    kp, kpp = synthesize_bridges(ksub_dec, w_top, w_bottom, affected_components,
                                 new_components, state_cap)
    if kpp_override is not None:
        kpp = kpp_override.with_name("Kpp")

    reports = ()
    if check:
        # earlier enhancements already moved some property channels
        reports = tuple(check_property(k, kpp, property_view(p, system), spec.affected, delta,
                                       state_cap) for p in properties)
        for r in reports:
            log.info("%s: %s", r.property_name, r.status)
        if not all(r.ok for r in reports):
            raise InconsistentEnhancementError(reports)

    relabel = tuple((c, delta) for c in sorted(spec.affected))
    info = EnhancementInfo(spec.name, delta, spec.affected, spec.wrapper, top, bottom)
    knew = CompositeCoordinator(
        (Part("K", system.coordinator, relabel), Part("W", w), Part("Kp", kp), Part("Kpp", kpp)),
        frozenset({delta, top, bottom}), info)
    enhanced = SystemModel(tuple(system.components) + tuple(new_components), knew, CBA)
    return EnhancementResult(enhanced, delta, top, bottom, ksub, ksub_dec, w, w_top, w_bottom,
                             kp, kpp, tuple(new_components), reports, doc)


def enhancements(coordinator) -> list:
    """Enhancements applied to a coordinator, innermost first."""
    found = []
    while isinstance(coordinator, CompositeCoordinator):
        if coordinator.enhancement is not None:
            found.append(coordinator.enhancement)
        coordinator = coordinator.parts[0].coordinator
    return found[::-1]


def property_view(prop, system: SystemModel):
    """The property over the events of ``system``'s closed composition.

    Each enhancement moves the original coordinator's affected connectors
    onto δ, so that is where the enforced order must still hold.
    """
    return view_through(prop, system.coordinator)


def view_through(prop, coordinator):
    """``prop`` relabeled by every enhancement inside ``coordinator``."""
    if coordinator is None:
        return prop
    for info in enhancements(coordinator):
        prop = decoupled_property(prop, info.affected, info.delta)
    return prop
