"""Command-line front end.

Subcommands: analyze, suggest, oracle, measure, sweep, list-builtins.
Exit codes are a stable contract: 0 for exact/pass, 1 for an
approximate/inexact finding, 2 for usage or validation errors.  Reports are
rendered as text tables or as a versioned JSON document (--format
structured); --out always writes the JSON document to a file.  Set NO_COLOR
to disable color in text output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .analyzer import AnalysisReport, analyze, check_layer, suggest_input_sizes
from .builtins import BUILTINS
from .config import ArchitectureConfig, build_network, load, shape_specs, to_dict
from .errors import EquicheckError
from .group import GroupElement, GroupKind, elements
from .metrics import (
    invariance_sweep,
    mirror_commutation,
    profile_equivariance,
    rotation_commutation,
)

EXIT_OK = 0
EXIT_INEXACT = 1
EXIT_ERROR = 2

#: Discrepancies and errors below this are treated as zero for float runs.
FLOAT_TOLERANCE = 1e-9


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _mark(ok: bool) -> str:
    mark = "✓" if ok else "✗"
    if _use_color():
        return f"\033[32m{mark}\033[0m" if ok else f"\033[31m{mark}\033[0m"
    return mark


def _resolve_config(ref: str) -> ArchitectureConfig:
    if ref in BUILTINS:
        return BUILTINS[ref]
    if os.path.exists(ref):
        return load(ref)
    raise EquicheckError(
        f"{ref!r} is neither a built-in ({', '.join(sorted(BUILTINS))}) nor a readable file"
    )


def _config_digest(config: ArchitectureConfig) -> str:
    canonical = json.dumps(to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _document(command: str, result: dict, config: ArchitectureConfig | None = None,
              seed: int | None = None) -> dict:
    return {
        "schema_version": 1,
        "tool": "equicheck",
        "tool_version": __version__,
        "command": command,
        "config_digest": _config_digest(config) if config else None,
        "seed": seed,
        "result": result,
    }


def _emit(doc: dict, text: str, args) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if args.format == "structured":
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(text)


def _parse_elements(raw: str | None, kind: GroupKind) -> tuple[GroupElement, ...]:
    if raw is None:
        return tuple(g for g in elements(kind) if g != GroupElement(0))
    out = []
    for name in raw.split(","):
        g = GroupElement.from_name(name.strip())
        if g.mirrored and kind is not GroupKind.P4M:
            raise EquicheckError(f"element {g.name!r} needs a p4m network")
        out.append(g)
    return tuple(out)


def _analysis_payload(config: ArchitectureConfig, report: AnalysisReport) -> dict:
    return {
        "name": config.name,
        "group": config.group,
        "input_size": report.input_size,
        "exact": report.exact,
        "violations": list(report.violations),
        "truncated_at": report.truncated_at,
        "suggested_sizes": list(report.suggested_sizes),
        "trace": [
            {
                "index": t.index,
                "kind": t.kind,
                "input_size": t.input_size,
                "padded_size": t.padded_size,
                "output_size": t.output_size,
                "condition_ok": t.condition_ok,
                "note": t.note,
            }
            for t in report.trace
        ],
    }


def _analysis_text(config: ArchitectureConfig, report: AnalysisReport) -> str:
    lines = [
        f"architecture: {config.name}  group: {config.group}  "
        f"input: {report.input_size}x{report.input_size}",
        f"{'#':>3}  {'layer':<16} {'in':>5} {'padded':>7} {'out':>5}  eq",
    ]
    for t in report.trace:
        note = f"  {t.note}" if t.note else ""
        lines.append(
            f"{t.index:>3}  {t.kind:<16} {t.input_size:>5} {t.padded_size:>7} "
            f"{t.output_size:>5}  {_mark(t.condition_ok)}{note}"
        )
    if report.exact:
        lines.append("verdict: exact")
    else:
        lines.append(f"verdict: approximate (violations at layers {list(report.violations)})")
        if report.suggested_sizes:
            sizes = ", ".join(str(s) for s in report.suggested_sizes)
            lines.append(f"exact input sizes nearby: {sizes}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    config = _resolve_config(args.config)
    input_size = args.input_size or config.input_size
    report = analyze(shape_specs(config), input_size)
    doc = _document("analyze", _analysis_payload(config, report), config)
    _emit(doc, _analysis_text(config, report), args)
    return EXIT_OK if report.exact else EXIT_INEXACT


def cmd_suggest(args) -> int:
    config = _resolve_config(args.config)
    sizes = suggest_input_sizes(shape_specs(config), args.lo, args.hi)
    payload = {"name": config.name, "lo": args.lo, "hi": args.hi, "exact_sizes": sizes}
    text = (
        f"exact input sizes for {config.name} in [{args.lo}, {args.hi}]: "
        + (", ".join(str(s) for s in sizes) if sizes else "none")
    )
    _emit(_document("suggest", payload, config), text, args)
    return EXIT_OK


def _parse_range(raw: str, field: str) -> tuple[int, int]:
    try:
        lo_s, hi_s = raw.split(":")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise EquicheckError(f"{field} must look like LO:HI, got {raw!r}")
    if lo > hi or lo < 1:
        raise EquicheckError(f"{field} is degenerate: {raw!r}")
    return lo, hi


def cmd_oracle(args) -> int:
    i_lo, i_hi = _parse_range(args.i_range, "--i-range")
    k_lo, k_hi = _parse_range(args.k_range, "--k-range")
    s_lo, s_hi = _parse_range(args.s_range, "--s-range")
    oracle = rotation_commutation if args.symmetry == "rot" else mirror_commutation
    cells = []
    agreements = 0
    for i in range(i_lo, i_hi + 1):
        for k in range(k_lo, min(k_hi, i) + 1):
            for s in range(s_lo, s_hi + 1):
                verdict = oracle(i, k, s)
                condition = check_layer(i, k, s, 0)
                agree = verdict.holds == condition
                agreements += agree
                cell = {"i": i, "k": k, "s": s, "holds": verdict.holds,
                        "condition": condition, "agree": agree}
                if verdict.counterexample is not None:
                    ce = verdict.counterexample
                    cell["counterexample"] = {
                        "output_index": list(ce.output_index),
                        "via_output": [list(ce.patch_via_output.top_left),
                                       list(ce.patch_via_output.bottom_right)],
                        "via_input": [list(ce.patch_via_input.top_left),
                                      list(ce.patch_via_input.bottom_right)],
                    }
                cells.append(cell)
    if not cells:
        raise EquicheckError("the requested ranges contain no valid (i, k, s) cells")
    agreement = agreements / len(cells)
    holds = sum(c["holds"] for c in cells)
    payload = {
        "symmetry": args.symmetry,
        "i_range": [i_lo, i_hi], "k_range": [k_lo, k_hi], "s_range": [s_lo, s_hi],
        "cells": cells,
        "total": len(cells),
        "holds_count": holds,
        "agreement": agreement,
    }
    lines = [
        f"{args.symmetry} commutation oracle over i in [{i_lo},{i_hi}], "
        f"k in [{k_lo},{k_hi}], s in [{s_lo},{s_hi}]",
        f"cells: {len(cells)}  commuting: {holds}  broken: {len(cells) - holds}",
        f"agreement with (i - k) mod s = 0 rule: {agreement:.1%} {_mark(agreement == 1.0)}",
    ]
    for c in cells:
        if not c["agree"]:
            lines.append(f"  DISAGREES: i={c['i']} k={c['k']} s={c['s']}")
    if len(cells) == 1 and "counterexample" in cells[0]:
        ce = cells[0]["counterexample"]
        lines.append(f"counterexample at output index {tuple(ce['output_index'])}: "
                     f"{ce['via_output']} vs {ce['via_input']}")
    _emit(_document("oracle", payload), "\n".join(lines), args)
    return EXIT_OK if agreement == 1.0 else EXIT_INEXACT


def cmd_measure(args) -> int:
    config = _resolve_config(args.config)
    net = build_network(config, args.input_size)
    group_elements = _parse_elements(args.elements, net.kind)
    profile = profile_equivariance(net, args.seed, group_elements, args.integer_weights)
    payload = {
        "name": config.name,
        "input_size": net.input_size,
        "seed": args.seed,
        "integer_weights": args.integer_weights,
        "elements": [g.name for g in group_elements],
        "entries": [
            {"layer": e.layer_index, "element": e.element.name, "error": e.error}
            for e in profile.entries
        ],
        "max_error": profile.max_error(),
    }
    lines = [
        f"equivariance profile: {config.name} at {net.input_size}x{net.input_size}, "
        f"seed {args.seed}, {'integer' if args.integer_weights else 'float'} weights",
        f"{'layer':>5}  {'element':<8} {'error':>12}",
    ]
    for e in profile.entries:
        lines.append(f"{e.layer_index:>5}  {e.element.name:<8} {e.error:>12.6g}")
    if not profile.entries:
        lines.append("  (no group-valued depths in this network)")
    lines.append(f"max error: {profile.max_error():.6g}")
    _emit(_document("measure", payload, config, args.seed), "\n".join(lines), args)
    return EXIT_OK if profile.max_error() <= FLOAT_TOLERANCE else EXIT_INEXACT


def cmd_sweep(args) -> int:
    config = _resolve_config(args.config)
    net = build_network(config, args.input_size)
    if args.angle_step <= 0:
        raise EquicheckError(f"--angle-step must be positive, got {args.angle_step}")
    angles = list(np.arange(0.0, 360.0, args.angle_step))
    points = invariance_sweep(net, args.seed, angles, args.integer_weights)
    grid_aligned = [p for p in points if p.angle % 90 == 0]
    worst_aligned = max((p.discrepancy for p in grid_aligned), default=0.0)
    payload = {
        "name": config.name,
        "input_size": net.input_size,
        "seed": args.seed,
        "integer_weights": args.integer_weights,
        "rows": [{"angle": p.angle, "discrepancy": p.discrepancy} for p in points],
        "max_discrepancy_90s": worst_aligned,
    }
    lines = [
        f"invariance sweep: {config.name} at {net.input_size}x{net.input_size}, "
        f"seed {args.seed} (inputs circle-cropped)",
        f"{'angle':>7}  {'discrepancy':>12}",
    ]
    for p in points:
        lines.append(f"{p.angle:>7.1f}  {p.discrepancy:>12.6g}")
    lines.append(f"max discrepancy at multiples of 90: {worst_aligned:.6g}")
    _emit(_document("sweep", payload, config, args.seed), "\n".join(lines), args)
    return EXIT_OK if worst_aligned <= FLOAT_TOLERANCE else EXIT_INEXACT


def cmd_list_builtins(args) -> int:
    rows = [
        {"name": cfg.name, "group": cfg.group, "input_size": cfg.input_size,
         "layers": len(cfg.layers)}
        for cfg in BUILTINS.values()
    ]
    payload = {"builtins": rows}
    lines = [f"{'name':<14} {'group':<5} {'input':>5} {'layers':>7}"]
    for r in rows:
        lines.append(f"{r['name']:<14} {r['group']:<5} {r['input_size']:>5} {r['layers']:>7}")
    _emit(_document("list-builtins", payload), "\n".join(lines), args)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equicheck",
        description="Check whether subsampling layers keep a network exactly "
                    "equivariant to quarter-turn rotations and mirrors.",
    )
    parser.add_argument("--version", action="version", version=f"equicheck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("config", help="built-in name or path to a config JSON")
        p.add_argument("--format", choices=("text", "structured"), default="text")
        p.add_argument("--out", help="also write the structured JSON document here")

    p = sub.add_parser("analyze", help="size trace and exactness verdict")
    common(p)
    p.add_argument("--input-size", type=int, help="override the config's input side")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("suggest", help="input sizes in a range that are exact")
    common(p)
    p.add_argument("lo", type=int)
    p.add_argument("hi", type=int)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("oracle", help="brute-force index commutation vs the modular rule")
    common(p, needs_config=False)
    p.add_argument("--i-range", default="2:24", help="input sides LO:HI")
    p.add_argument("--k-range", default="1:5", help="kernel sizes LO:HI")
    p.add_argument("--s-range", default="1:4", help="strides LO:HI")
    p.add_argument("--symmetry", choices=("rot", "mirror"), default="rot")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("measure", help="per-depth equivariance error, random weights")
    common(p)
    p.add_argument("--input-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--integer-weights", action="store_true",
                   help="draw small integer weights/inputs so errors are exact")
    p.add_argument("--elements", help="comma list, e.g. r,r2,r3 or m,mr")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sweep", help="output discrepancy under rotated inputs")
    common(p)
    p.add_argument("--input-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--integer-weights", action="store_true")
    p.add_argument("--angle-step", type=float, default=30.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("list-builtins", help="embedded example architectures")
    common(p, needs_config=False)
    p.set_defaults(func=cmd_list_builtins)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (EquicheckError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())
