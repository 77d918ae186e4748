"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 no coordinator exists,
3 inconsistent enhancement or violated property.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .buchi import complement, model_check
from .consistency import (POSSIBLY_INCONSISTENT, build_assumption, check_property,
                          relevant_channels, theorem_oracle)
from .dot import to_dot
from .enhancement import EnhancementSpec, apply_enhancement, property_view, view_through
from .errors import (CoordsynthError, InconsistentEnhancementError, StateSpaceError,
                     SynthesisError)
from .formats import read_buchi, read_file, read_lts, write_file
from .lts import DEFAULT_STATE_CAP, ActionLabel, deadlock_states, project_onto_channels
from .manifest import load_system, save_system
from .msc import parse_msc
from .simulate import simulate
from .synthesis import build_cba, synthesize, synthesize_noop
from .system import CompositeCoordinator, coordinator_lts

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_COORDINATOR = 2
EXIT_INCONSISTENT = 3

log = logging.getLogger("coordsynth")


def _tsv(stream=None):
    return csv.writer(stream or sys.stdout, delimiter="\t", lineterminator="\n")


def _require_out(args) -> Path:
    if args.out is None:
        raise CoordsynthError("this command needs --out DIR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _properties(args) -> list:
    return [read_buchi(p) for p in args.property]


def cmd_synthesize(args) -> int:
    system, sources = load_system(args.manifest)
    props = _properties(args)
    out = _require_out(args)
    try:
        cba = synthesize(system, props, state_cap=args.state_cap)
    except SynthesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_COORDINATOR
    manifest = save_system(cba, out, sources)
    k = cba.coordinator_lts()
    print(f"coordinator\t{len(k.states)} states\t{len(k.transitions)} transitions")
    print(f"manifest\t{manifest}")
    return EXIT_OK


def _print_reports(reports, stream=None):
    w = _tsv(stream)
    for r in reports:
        w.writerow(r.row())


def cmd_enhance(args) -> int:
    system, sources = load_system(args.manifest)
    props = _properties(args)
    out = _require_out(args)
    doc = parse_msc(Path(args.msc).read_text(encoding="utf-8"), source=args.msc)
    spec = EnhancementSpec(doc, args.wrapper, frozenset(args.affected),
                           tuple(args.new) if args.new else None, args.subcoordinator,
                           args.name or Path(args.msc).stem)
    kpp = read_lts(args.kpp) if args.kpp else None
    try:
        result = apply_enhancement(system, spec, props, state_cap=args.state_cap,
                                   kpp_override=kpp)
    except InconsistentEnhancementError as exc:
        _print_reports(exc.reports)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except SynthesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_COORDINATOR
    manifest = save_system(result.system, out, sources)
    for stem in ("Ksub", "Ksub_decoupled", "W_TOP", "W_BOTTOM"):
        write_file(out / f"{spec.name}.{stem}.lts", result.artifacts()[stem])
    _print_reports(result.reports)
    print(f"manifest\t{manifest}", file=sys.stderr)
    return EXIT_OK


def _enhanced_levels(coordinator):
    """(info, base K, K″) for every enhancement in the coordinator tree, outermost first."""
    while isinstance(coordinator, CompositeCoordinator):
        if coordinator.enhancement is not None:
            yield coordinator.enhancement, coordinator.parts[0].coordinator, \
                coordinator.part("Kpp").coordinator
        coordinator = coordinator.parts[0].coordinator


def cmd_check(args) -> int:
    system, _ = load_system(args.manifest)
    props = _properties(args)
    levels = list(_enhanced_levels(system.coordinator))
    if not levels:
        raise CoordsynthError("the manifest has no enhanced coordinator to check")
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    rows = []
    failed = False
    for info, base, kpp_node in levels:
        k = coordinator_lts(base, args.state_cap)
        kpp = coordinator_lts(kpp_node, args.state_cap)
        for p in props:
            p = view_through(p, base)
            r = check_property(k, kpp, p, info.affected, info.delta, args.state_cap)
            row = [info.name] + r.row()
            if args.oracle and r.channels:
                v = theorem_oracle(k, kpp, p, info.affected, info.delta, args.state_cap)
                row.append("oracle:" + ("holds" if v.empty else "violated " + v.describe()))
            rows.append(row)
            failed |= r.status == POSSIBLY_INCONSISTENT
            if out and r.channels:
                _draw_check(out, info, k, kpp, p, args.state_cap)
    _tsv().writerows(rows)
    if out:
        with open(out / "report.tsv", "w", encoding="utf-8", newline="") as fh:
            w = _tsv(fh)
            w.writerow(["enhancement", "property", "channels", "delta", "result", "witness"])
            w.writerows(rows)
    return EXIT_INCONSISTENT if failed else EXIT_OK


def _draw_check(out: Path, info, k, kpp, prop, state_cap):
    from .plotting import draw_automaton  # matplotlib is only loaded when drawing

    channels = relevant_channels(prop, info.affected)
    a = build_assumption(k, channels, info.delta)
    kpp_delta = project_onto_channels(kpp, {info.delta})
    sigma = kpp_delta.action_labels | {l for l in a.alphabet if isinstance(l, ActionLabel)}
    stem = f"{info.name}_{prop.name}"
    draw_automaton(kpp_delta, out / f"{stem}_Kpp_delta.png", f"K'' on {info.delta}")
    draw_automaton(a, out / f"{stem}_A.png", "assumption A")
    draw_automaton(complement(a, sigma, state_cap), out / f"{stem}_notA.png", "NOT(A)")


def cmd_verify(args) -> int:
    system, _ = load_system(args.manifest)
    props = _properties(args)
    if system.coordinator is None:
        # components without a coordinator are observed through one that forwards everything
        system = build_cba(system.components, synthesize_noop(system.components, args.state_cap))
    closed = system.closed_lts(args.state_cap)
    dead = deadlock_states(closed)
    w = _tsv()
    w.writerow(["states", str(len(closed.states))])
    w.writerow(["deadlocks", str(len(dead))])
    bad = bool(dead)
    for p in props:
        v = model_check(closed, property_view(p, system), args.state_cap)
        w.writerow([p.name, "holds" if v.empty else "violated", "" if v.empty else v.describe()])
        bad |= not v.empty
    return EXIT_INCONSISTENT if bad else EXIT_OK


def cmd_simulate(args) -> int:
    system, _ = load_system(args.manifest)
    closed = system.closed_lts(args.state_cap)
    result = simulate(closed, args.steps, args.seed)
    w = _tsv()
    for i, step in enumerate(result.steps, start=1):
        w.writerow([i, step.event, "marked" if step.marked else ""])
    if result.deadlocked:
        w.writerow(["deadlock", len(result.steps), ""])
    return EXIT_OK


def cmd_export_dot(args) -> int:
    obj = read_file(args.file)
    text = to_dot(obj)
    if args.out is None:
        if args.png:
            raise CoordsynthError("--png needs --out DIR")
        sys.stdout.write(text)
        return EXIT_OK
    out = _require_out(args)
    stem = Path(args.file).stem
    (out / f"{stem}.dot").write_text(text, encoding="utf-8")
    if args.png:
        from .plotting import draw_automaton

        draw_automaton(obj, out / f"{stem}.png")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state-cap", type=int, default=argparse.SUPPRESS,
                        help=f"abort beyond this many states (default {DEFAULT_STATE_CAP})")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    parser = argparse.ArgumentParser(
        prog="coordsynth",
        description="Synthesize, enhance and check coordinators of component systems.")
    parser.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def prop_arg(p):
        p.add_argument("-p", "--property", action="append", default=[], metavar="BUCHI",
                       help="property file (repeatable)")

    p = sub.add_parser("synthesize", parents=[common], help="build a failure-free coordinator")
    p.add_argument("manifest")
    prop_arg(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("enhance", parents=[common], help="insert a wrapper described by MSCs")
    p.add_argument("manifest")
    p.add_argument("msc")
    p.add_argument("--wrapper", required=True, help="wrapper instance name")
    p.add_argument("--affected", type=int, action="append", required=True,
                   help="affected connector (repeatable)")
    p.add_argument("--new", action="append", help="new component instance (repeatable)")
    p.add_argument("--subcoordinator", help="lifeline standing for the sub-coordinator")
    p.add_argument("--name", help="enhancement name (default: MSC file stem)")
    p.add_argument("--kpp", help="use this K'' instead of the synthesized one")
    prop_arg(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("check", parents=[common], help="compositional consistency check")
    p.add_argument("manifest")
    p.add_argument("--oracle", action="store_true", help="also model-check the conclusion")
    prop_arg(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", parents=[common], help="monolithic model check")
    p.add_argument("manifest")
    prop_arg(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="seeded random run")
    p.add_argument("manifest")
    p.add_argument("--steps", type=int, default=20)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export-dot", parents=[common], help="DOT rendering of an automaton")
    p.add_argument("file")
    p.add_argument("--png", action="store_true", help="also draw a PNG (needs --out)")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StateSpaceError as exc:
        print(f"error: {exc}; raise --state-cap", file=sys.stderr)
        return EXIT_INPUT
    except (CoordsynthError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
