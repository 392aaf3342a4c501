"""Command-line interface.

Every command reads JSON files, writes one JSON (or plain text) report and
exits with 0 for a true verdict, 1 for a false verdict (the report carries
the witness) and 2 for unreadable or ill-formed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path

from .cells import (
    boundary_classify,
    common_boundary,
    in_E,
    in_V_id,
    intersection_witness,
    is_special,
    quasi_adjacency_classify,
    adjacency_classify,
    BoundaryClassKind,
)
from .classes import PMClass, fraction_str, is_boundary, self_intersect
from .config import Configuration
from .errors import CremonaError, ParseError, SchemaError
from .maps import CharMatrix, apply, check_identities, inverse
from .reduce import owning_cells, scan_regions, segment_scan, voronoi_reduce

EXIT_TRUE, EXIT_FALSE, EXIT_INPUT = 0, 1, 2


def _read_json(path: str, what: str) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{what} {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} {path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _config(args) -> Configuration:
    if not args.config:
        raise SchemaError("--config is required for this command")
    try:
        return Configuration.from_json(_read_json(args.config, "configuration"))
    except SchemaError as exc:
        raise SchemaError(f"{args.config}: {exc}") from None


def _classes(args, cfg: Configuration, count: int | None = None) -> list[PMClass]:
    paths = args.cls or []
    if count is not None and len(paths) != count:
        raise SchemaError(f"expected {count} --class file(s), got {len(paths)}")
    out = []
    for p in paths:
        try:
            out.append(PMClass.from_json(_read_json(p, "class"), cfg))
        except SchemaError as exc:
            raise SchemaError(f"{p}: {exc}") from None
    return out


def _matrices(args, cfg: Configuration | None, count: int | None = None) -> list[CharMatrix]:
    paths = args.matrix or []
    if count is not None and len(paths) != count:
        raise SchemaError(f"expected {count} --matrix file(s), got {len(paths)}")
    out = []
    for p in paths:
        try:
            out.append(CharMatrix.from_json(_read_json(p, "matrix"), cfg))
        except SchemaError as exc:
            raise SchemaError(f"{p}: {exc}") from None
    return out


def _new_points(cfg: Configuration, before: int) -> list[dict]:
    return [{"id": p, "parents": cfg.sorted(cfg.parents(p))} for p in cfg.points[before:]]


# commands -----------------------------------------------------------------------


def cmd_validate_config(args) -> tuple[int, dict]:
    cfg = _config(args)
    return EXIT_TRUE, {"command": "validate-config", "ok": True, "points": len(cfg), "curves": len(cfg.curves)}


def cmd_check_matrix(args) -> tuple[int, dict]:
    paths = args.matrix or []
    if len(paths) != 1:
        raise SchemaError("expected one --matrix file")
    data = _read_json(paths[0], "matrix")
    if not isinstance(data, dict) or "d" not in data or "m" not in data:
        raise SchemaError(f"{paths[0]}: matrix needs at least d and m")
    try:
        d = int(data["d"])
        m = [int(x) for x in data["m"]]
        mp = [int(x) for x in data["m_prime"]] if "m_prime" in data else None
        A = [[int(x) for x in row] for row in data["A"]] if "A" in data else None
    except (TypeError, ValueError):
        raise SchemaError(f"{paths[0]}: non-integer entry") from None
    if A is not None and (len(A) != len(m) or any(len(row) != len(m) for row in A)):
        raise SchemaError(f"{paths[0]}: A must be {len(m)}x{len(m)}")
    if mp is not None and len(mp) != len(m):
        raise SchemaError(f"{paths[0]}: m_prime must have {len(m)} entries")
    rep = check_identities(d, m, mp, A)
    return (EXIT_TRUE if rep.ok else EXIT_FALSE), {"command": "check-matrix", **rep.to_json()}


def cmd_check_class(args) -> tuple[int, dict]:
    cfg = _config(args)
    (c,) = _classes(args, cfg, 1)
    out: dict = {"command": "check-class", "self_intersection": fraction_str(self_intersect(c))}
    if is_boundary(c):
        kind = boundary_classify(c, cfg)
        out["boundary"] = kind.value
        return (EXIT_TRUE if kind is not BoundaryClassKind.NotBoundary else EXIT_FALSE), out
    e = in_E(c, cfg)
    out["in_E"] = e.to_json()
    if not e.verdict:
        return EXIT_FALSE, out
    out["special"] = is_special(c, cfg)
    v = in_V_id(c, cfg)
    out["in_V_id"] = v.to_json()
    out["inVId"] = v.verdict
    if v.verdict:
        out["owning_cells"] = [g.to_json(cfg) for g in owning_cells(c, cfg)]
    return (EXIT_TRUE if v.verdict else EXIT_FALSE), out


def cmd_act(args) -> tuple[int, dict]:
    cfg = _config(args)
    (M,) = _matrices(args, cfg, 1)
    (c,) = _classes(args, cfg, 1)
    before = len(cfg)
    if args.inverse:
        M = inverse(M)
    img = apply(M, c, cfg)
    return EXIT_TRUE, {
        "command": "act",
        "class": img.to_json(cfg),
        "new_points": _new_points(cfg, before),
        "pushforward": dict(sorted(M.pushforward.items())),
    }


def cmd_classify(args) -> tuple[int, dict]:
    cfg = _config(args)
    (M,) = _matrices(args, cfg, 1)
    adj = adjacency_classify(M, cfg)
    quasi = quasi_adjacency_classify(M, cfg)
    return (EXIT_TRUE if quasi.quasi_adjacent else EXIT_FALSE), {
        "command": "classify",
        "characteristic": [M.d, sorted(M.m, reverse=True)],
        "adjacency": adj.value,
        "adjacent": adj.adjacent,
        "quasi_adjacency": quasi.value,
        "quasi_adjacent": quasi.quasi_adjacent,
    }


def cmd_witness(args) -> tuple[int, dict]:
    cfg = _config(args)
    mats = _matrices(args, cfg)
    before = len(cfg)
    if len(mats) == 1:
        u = intersection_witness(mats[0], cfg)
        out = {"command": "witness", "kind": "intersection"}
    elif len(mats) == 2:
        u = common_boundary(mats[0], mats[1], cfg)
        out = {"command": "witness", "kind": "common-boundary"}
    else:
        raise SchemaError("witness takes one or two --matrix files")
    out["witness"] = None if u is None else u.to_json(cfg)
    out["new_points"] = _new_points(cfg, before)
    return (EXIT_TRUE if u is not None else EXIT_FALSE), out


def cmd_reduce(args) -> tuple[int, dict]:
    cfg = _config(args)
    (c,) = _classes(args, cfg, 1)
    before = len(cfg)
    trace = voronoi_reduce(c, cfg)
    return EXIT_TRUE, {"command": "reduce", **trace.to_json(), "new_points": _new_points(cfg, before)}


def cmd_scan(args) -> tuple[int, dict]:
    cfg = _config(args)
    a, b = _classes(args, cfg, 2)
    samples = segment_scan(a, b, cfg, args.samples)
    regions = scan_regions(samples)
    return EXIT_TRUE, {
        "command": "scan",
        "samples": [s.to_json(cfg) for s in samples],
        "regions": [
            {"from": fraction_str(t0), "to": fraction_str(t1), "cells": len(cells)}
            for t0, t1, cells in regions
        ],
    }


COMMANDS = {
    "validate-config": cmd_validate_config,
    "check-matrix": cmd_check_matrix,
    "check-class": cmd_check_class,
    "act": cmd_act,
    "classify": cmd_classify,
    "witness": cmd_witness,
    "reduce": cmd_reduce,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cremona-voronoi", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config")
    parser.add_argument("--class", dest="cls", action="append", help="class file (repeat for scan)")
    parser.add_argument("--matrix", action="append", help="matrix file (repeat for witness)")
    parser.add_argument("--out")
    parser.add_argument("--samples", type=int, default=11)
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--inverse", action="store_true", help="act by the inverse matrix")
    return parser


def _text(report: dict, prefix: str = "") -> list[str]:
    lines = []
    for k, v in report.items():
        if isinstance(v, dict):
            lines.extend(_text(v, f"{prefix}{k}."))
        else:
            lines.append(f"{prefix}{k}: {json.dumps(v, sort_keys=True)}")
    return lines


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, report = COMMANDS[args.command](args)
    except CremonaError as exc:
        code, report = EXIT_INPUT, {"command": args.command, "error": exc.tag, "message": str(exc)}
    report["exit_code"] = code
    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        text = "\n".join(_text(report)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
