"""JSON manifests binding component files to connectors.

::

    {"kind": "CBA",
     "components": [{"name": "Client1", "file": "Client1.lts", "channel": 1}],
     "coordinator": {"file": "K.lts"}}

An enhanced coordinator is stored as a tree instead of a single file::

    "coordinator": {"composite": {
        "parts": [{"name": "K", "relabel": [[1, 417]], "coordinator": {"file": "K.lts"}},
                  {"name": "W", "coordinator": {"file": "RETRY.W.lts"}}, ...],
        "hide_channels": [401, 417, 432],
        "enhancement": {"name": "RETRY", "delta": 417, "affected": [1],
                        "wrapper": "WR", "top": 432, "bottom": 401}}}

File paths are relative to the manifest.
"""
from __future__ import annotations

import json
import shutil
from pathlib import Path

from .errors import ParseError
from .formats import read_lts, render_lts
from .lts import Lts
from .system import (CBA, CFA, Component, CompositeCoordinator, EnhancementInfo, Part,
                     SystemModel)


class Sources:
    """Remembers which file each loaded behavior came from, to copy it verbatim."""

    def __init__(self):
        self._entries = []

    def __setitem__(self, lts: Lts, path):
        self._entries.append((lts, Path(path)))

    def __len__(self):
        return len(self._entries)

    def path_of(self, lts: Lts):
        for known, path in self._entries:
            if known == lts and known.name == lts.name:
                return path
        return None


def _load_coordinator(node, base: Path, sources: Sources, where: str):
    if not isinstance(node, dict):
        raise ParseError(f"{where}: expected an object", None, str(base))
    if "file" in node:
        path = base / node["file"]
        lts = read_lts(path)
        sources[lts] = path
        return lts
    if "composite" in node:
        c = node["composite"]
        parts = []
        for i, p in enumerate(c.get("parts", [])):
            sub = _load_coordinator(p["coordinator"], base, sources, f"{where}.parts[{i}]")
            relabel = tuple((int(a), int(b)) for a, b in p.get("relabel", []))
            parts.append(Part(p["name"], sub, relabel))
        info = None
        e = c.get("enhancement")
        if e:
            info = EnhancementInfo(e["name"], int(e["delta"]), frozenset(e["affected"]),
                                   e["wrapper"], int(e["top"]), int(e["bottom"]))
        return CompositeCoordinator(tuple(parts), frozenset(c.get("hide_channels", [])), info)
    raise ParseError(f"{where}: needs 'file' or 'composite'", None, str(base))


def load_system(path) -> tuple:
    """Return ``(SystemModel, Sources)``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, str(path)) from None
    base = path.parent
    sources = Sources()
    try:
        components = []
        for c in data["components"]:
            lts = read_lts(base / c["file"])
            sources[lts] = base / c["file"]
            components.append(Component(c["name"], lts, int(c["channel"])))
        coordinator = None
        if data.get("coordinator") is not None:
            coordinator = _load_coordinator(data["coordinator"], base, sources, "coordinator")
        kind = data.get("kind", CBA if coordinator is not None else CFA)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"manifest entry missing or malformed: {exc}", None, str(path)) from None
    return SystemModel(tuple(components), coordinator, kind), sources


def _write_lts(lts: Lts, out: Path, stem: str, sources: Sources | None) -> str:
    name = f"{stem}.lts"
    target = out / name
    origin = sources.path_of(lts) if sources else None
    if origin is not None:
        if Path(origin).resolve() != target.resolve():
            shutil.copyfile(origin, target)
    else:
        target.write_text(render_lts(lts, name=lts.name or stem), encoding="utf-8")
    return name


def _dump_coordinator(c, out: Path, stem: str, sources) -> dict:
    if isinstance(c, Lts):
        return {"file": _write_lts(c, out, stem, sources)}
    prefix = c.enhancement.name if c.enhancement else stem
    parts = []
    for i, p in enumerate(c.parts):
        sub_stem = stem if i == 0 else f"{prefix}.{p.name}"
        entry = {"name": p.name, "coordinator": _dump_coordinator(p.coordinator, out, sub_stem, sources)}
        if p.relabel:
            entry["relabel"] = [list(pair) for pair in p.relabel]
        parts.append(entry)
    node = {"parts": parts, "hide_channels": sorted(c.hide_channels)}
    if c.enhancement:
        e = c.enhancement
        node["enhancement"] = {"name": e.name, "delta": e.delta, "affected": sorted(e.affected),
                               "wrapper": e.wrapper, "top": e.top, "bottom": e.bottom}
    return {"composite": node}


def save_system(system: SystemModel, out, sources: Sources | None = None,
                manifest_name: str = "system.json", coordinator_stem: str = "K") -> Path:
    """Write every behavior plus the manifest into ``out``; return the manifest path."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    data = {"kind": system.kind, "components": []}
    for c in system.components:
        data["components"].append({"name": c.name, "file": _write_lts(c.lts, out, c.name, sources),
                                   "channel": c.channel})
    if system.coordinator is not None:
        data["coordinator"] = _dump_coordinator(system.coordinator, out, coordinator_stem, sources)
    target = out / manifest_name
    target.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return target
