"""Coordinator synthesis, wrapper-based enhancement and assume-guarantee checking
for component systems modeled as labeled transition systems."""
from .buchi import (BuchiProperty, EdgeGuard, Verdict, accepts_lasso, complement, is_empty,
                    lts_to_buchi, model_check, product)
from .consistency import (ConsistencyReport, build_assumption, check_consistency,
                          relevant_channels)
from .enhancement import (EnhancementSpec, apply_enhancement, derive_wrapper_views,
                          sub_coordinator, synthesize_bridges)
from .errors import (ChannelMismatchError, CoordsynthError, InconsistentEnhancementError,
                     ParseError, PreconditionError, StateSpaceError, SynthesisError,
                     UnsupportedFragmentError)
from .formats import parse_buchi, parse_lts, render_buchi, render_lts
from .lts import (ActionLabel, Lts, RelabelMap, Tau, decouple, parallel_compose,
                  project_onto_channels, relabel)
from .msc import expand_instance_sets, msc_to_lts, parse_msc, render_msc
from .synthesis import build_cba, enforce, synthesize, synthesize_noop
from .system import Component, CompositeCoordinator, SystemModel, fresh_channel_id

__version__ = "0.1.0"

__all__ = [
    "ActionLabel",
    "BuchiProperty",
    "ChannelMismatchError",
    "Component",
    "CompositeCoordinator",
    "ConsistencyReport",
    "CoordsynthError",
    "EdgeGuard",
    "EnhancementSpec",
    "InconsistentEnhancementError",
    "Lts",
    "ParseError",
    "PreconditionError",
    "RelabelMap",
    "StateSpaceError",
    "SynthesisError",
    "SystemModel",
    "Tau",
    "UnsupportedFragmentError",
    "Verdict",
    "accepts_lasso",
    "apply_enhancement",
    "build_assumption",
    "build_cba",
    "check_consistency",
    "complement",
    "decouple",
    "derive_wrapper_views",
    "enforce",
    "expand_instance_sets",
    "fresh_channel_id",
    "is_empty",
    "lts_to_buchi",
    "model_check",
    "msc_to_lts",
    "parallel_compose",
    "parse_buchi",
    "parse_lts",
    "parse_msc",
    "product",
    "project_onto_channels",
    "relabel",
    "relevant_channels",
    "render_buchi",
    "render_lts",
    "render_msc",
    "sub_coordinator",
    "synthesize",
    "synthesize_bridges",
    "synthesize_noop",
]
