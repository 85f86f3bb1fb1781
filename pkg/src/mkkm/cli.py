"""Command-line front end: mkkm {solve,validate,cake,caratheodory,demo-paper-example}."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import List, Optional

from .apps import HypothesisError, cake_solve, caratheodory_solve
from .cover import NoLabel, validate_mkomiya
from .instances import InstanceError, is_cake, load, parse_cake, parse_instance, parse_points
from .rational import Q, barycenter

EXIT_OK, EXIT_FAILED, EXIT_MALFORMED = 0, 1, 2


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")


def _delta(text: Optional[str]):
    if text is None:
        return None
    try:
        d = Q(text)
    except (ValueError, ZeroDivisionError):
        raise InstanceError("", f"--delta: not a rational: {text!r}") from None
    if d <= 0:
        raise InstanceError("", "--delta must be positive")
    return d


def _dump_trace(name: str, doc: dict) -> Optional[str]:
    """Write the trace to $MKKM_TRACE_DIR when set; returns the file path."""
    target = os.environ.get("MKKM_TRACE_DIR")
    if not target:
        return None
    os.makedirs(target, exist_ok=True)
    path = os.path.join(target, f"{name}-{time.strftime('%Y%m%dT%H%M%S')}-{os.getpid()}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
    return path


def cmd_solve(args) -> int:
    from .solver import solve
    doc = load(args.instance)
    delta = _delta(args.delta)
    if is_cake(doc):
        C = parse_cake(doc).cover()
        p = barycenter(list(C.polytope.vertices))
    else:
        C = parse_instance(doc)
        p = None
    wit = solve(C, p, delta, record=args.trace)
    out = wit.to_json()
    if args.trace:
        path = _dump_trace("solve", {"trace": out["trace"]})
        if path is not None:
            out["trace"] = {"file": path}
    _emit(out)
    return EXIT_OK


def cmd_validate(args) -> int:
    doc = load(args.instance)
    C = parse_cake(doc).cover() if is_cake(doc) else parse_instance(doc)
    report = validate_mkomiya(C, args.resolution)
    _emit(report.to_json())
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_cake(args) -> int:
    inst = parse_cake(load(args.instance))
    _emit(cake_solve(inst, _delta(args.delta)).to_json())
    return EXIT_OK


def cmd_caratheodory(args) -> int:
    inst = parse_points(load(args.instance))
    _emit(caratheodory_solve(inst).to_json())
    return EXIT_OK


def cmd_demo(args) -> int:
    from .worked_example import run_demo
    result = run_demo(check=True)
    path = _dump_trace("demo", {"trace": result["trace"], "states": result["states"]})
    if path is not None:
        result = {k: v for k, v in result.items() if k not in ("trace", "states")}
        result["trace_file"] = path
    _emit(result)
    return EXIT_OK if result["pass"] else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mkkm", description="Constructive matroid-colorful KKM solver.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="find an approximate colorful witness for a cover instance")
    p.add_argument("instance")
    p.add_argument("--delta", help="target simplex diameter (rational)")
    p.add_argument("--trace", action="store_true", help="include the elimination step log")
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("validate", help="grid-check the M-Komiya condition")
    p.add_argument("instance")
    p.add_argument("--resolution", type=int, default=8)
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("cake", help="envy-free division among a basis of guests")
    p.add_argument("instance")
    p.add_argument("--delta")
    p.set_defaults(func=cmd_cake)
    p = sub.add_parser("caratheodory", help="independent set whose hull contains the origin")
    p.add_argument("instance")
    p.set_defaults(func=cmd_caratheodory)
    p = sub.add_parser("demo-paper-example", help="replay the rhombus worked example against its golden trace")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_MALFORMED
    try:
        return args.func(args)
    except InstanceError as exc:
        _emit({"error": "malformed input", "path": exc.path, "message": exc.msg})
        return EXIT_MALFORMED
    except (HypothesisError, NoLabel) as exc:
        _emit({"error": "validation failed", "message": str(exc)})
        return EXIT_FAILED

