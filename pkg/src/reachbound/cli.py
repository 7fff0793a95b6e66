"""Command-line front end.

Subcommands: verify, compare, certify, mc, plot.  Exit codes for verify:
0 = safe, 1 = unknown, 2 = falsified; any error exits above 2 (3 for
file/value problems, 4 for usage mistakes).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .intervals import Box
from .network import read_model
from .reports import (
    CELL_FULL_COLOR,
    CELL_PARTIAL_COLOR,
    read_mc_points,
    read_reach_cells,
    render_svg,
    verdict_document,
    write_certification,
    write_mc_points,
    write_reach_cells,
    write_verdict,
)
from .topology import extract_subset
from .verifier import (
    FALSIFIED,
    SAFE,
    UNKNOWN,
    VerificationProblem,
    monte_carlo,
    verify,
)

_EXIT = {SAFE: 0, UNKNOWN: 1, FALSIFIED: 2}
_EXIT_ERROR = 3
_EXIT_USAGE = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # box values like "-1,2;-1,2" must parse as arguments, not option
        # strings; there are no numeric short options, so anything starting
        # with "-<digit>" or "-." is data
        self._negative_number_matcher = re.compile(r"^-[\d.]")

    # argparse exits with code 2 by default, which would collide with "falsified"
    def error(self, message):
        raise _UsageError(message)


def parse_box(text: str) -> Box:
    """Parse "lo,hi;lo,hi;..." into a box."""
    dims = []
    for part in text.split(";"):
        pieces = part.split(",")
        if len(pieces) != 2:
            raise ValueError(f"expected 'lo,hi' pairs separated by ';', got {text!r}")
        dims.append((float(pieces[0]), float(pieces[1])))
    return Box.from_bounds(dims)


def parse_grid(text: str) -> tuple[int, ...]:
    counts = tuple(int(p) for p in text.split(","))
    if not counts or any(c < 1 for c in counts):
        raise ValueError(f"grid counts must be positive integers, got {text!r}")
    return counts


@dataclass
class ProblemSpec:
    """Everything a verification run needs, as given on the command line."""

    model_path: str
    input_box: Box
    safe_box: Optional[Box]
    domain: str = "box"
    mode: str = "auto"
    grid: Optional[tuple[int, ...]] = None
    max_refinements: int = 0
    seed: int = 0
    falsify_samples: int = 0
    out: Optional[str] = None
    cells_out: Optional[str] = None

    def problem(self) -> VerificationProblem:
        if self.safe_box is None:
            raise ValueError("a safe box is required")
        return VerificationProblem(
            net=read_model(self.model_path),
            input_box=self.input_box,
            safe_box=self.safe_box,
            domain=self.domain,
            mode=self.mode,
            grid=self.grid,
            max_refinements=self.max_refinements,
            seed=self.seed,
            falsify_samples=self.falsify_samples,
        )


def _spec_from_args(args) -> ProblemSpec:
    return ProblemSpec(
        model_path=args.model,
        input_box=parse_box(args.input),
        safe_box=parse_box(args.safe) if getattr(args, "safe", None) else None,
        domain=getattr(args, "domain", "box"),
        mode=getattr(args, "mode", "auto"),
        grid=parse_grid(args.grid) if getattr(args, "grid", None) else None,
        max_refinements=getattr(args, "max_refine", 0),
        seed=getattr(args, "seed", 0),
        falsify_samples=getattr(args, "falsify_samples", 0),
        out=getattr(args, "out", None),
        cells_out=getattr(args, "cells_out", None),
    )


def cmd_verify(args) -> int:
    spec = _spec_from_args(args)
    verdict = verify(spec.problem())
    doc = verdict_document(verdict)
    print(json.dumps(doc, indent=1))
    if spec.out:
        write_verdict(verdict, spec.out)
    if spec.cells_out and verdict.cell_batch is not None:
        write_reach_cells(verdict.cell_batch, spec.cells_out)
    return _EXIT[verdict.status]


def cmd_compare(args) -> int:
    """Run boundary, subset and full modes at the same per-cell width."""
    spec = _spec_from_args(args)
    rows = []
    for mode in ("boundary", "subset", "full"):
        problem = spec.problem()
        verdict = verify(
            VerificationProblem(
                net=problem.net,
                input_box=problem.input_box,
                safe_box=problem.safe_box,
                domain=problem.domain,
                mode=mode,
                grid=problem.grid,
                seed=problem.seed,
            )
        )
        row = {
            "mode": mode,
            "cells": verdict.stats.get("cells_propagated"),
            "verdict": verdict.status,
            "time_ms": verdict.stats.get("wall_ms"),
            "hull": None
            if verdict.output_hull is None
            else [[d.lo, d.hi] for d in verdict.output_hull.dims],
        }
        for key in ("cells_total", "cells_certified", "cells_kept"):
            if key in verdict.stats:
                row[key] = verdict.stats[key]
        rows.append(row)
    width = max(len(m["mode"]) for m in rows)
    print(f"{'mode':<{width}}  {'cells':>8}  {'verdict':>9}  {'time_ms':>10}")
    for row in rows:
        print(
            f"{row['mode']:<{width}}  {row['cells']:>8}  {row['verdict']:>9}  "
            f"{row['time_ms']:>10.2f}"
        )
    if spec.out:
        Path(spec.out).write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")
    return 0


def cmd_certify(args) -> int:
    net = read_model(args.model)
    input_box = parse_box(args.input)
    grid = parse_grid(args.grid) if args.grid else (1,) * input_box.dim
    if len(grid) == 1 and input_box.dim > 1:
        grid = grid * input_box.dim
    extraction = extract_subset(net, input_box, grid)
    if args.out:
        write_certification(extraction, args.out)
    summary = dict(extraction.counts)
    summary["certified_cells"] = int(extraction.certified.sum())
    print(json.dumps(summary, indent=1))
    return 0


def cmd_mc(args) -> int:
    net = read_model(args.model)
    region = parse_box(args.input)
    safe = parse_box(args.safe) if args.safe else None
    result = monte_carlo(net, region, args.samples, args.seed, safe=safe)
    if args.out:
        write_mc_points(result, args.out)
    doc = {
        "samples": int(result.points.shape[0]),
        "image_hull": [[d.lo, d.hi] for d in result.image_hull.dims],
        "violations": int(result.violations.shape[0]),
        "first_violation": None
        if result.violations.shape[0] == 0
        else [float(v) for v in result.violations[0]],
    }
    print(json.dumps(doc, indent=1))
    return 0


def cmd_plot(args) -> int:
    proj = tuple(args.proj) if args.proj else (0, 1)
    layers = []
    for path, color in (
        (args.full_cells, CELL_FULL_COLOR),
        (args.partial_cells, CELL_PARTIAL_COLOR),
    ):
        if path:
            _, lo, hi = read_reach_cells(path)
            if lo.shape[0] and max(proj) >= lo.shape[1]:
                raise ValueError(f"projection {proj} out of range for {lo.shape[1]} outputs")
            layers.append((color, lo, hi))
    mc_points = read_mc_points(args.mc) if args.mc else None
    safe = parse_box(args.safe) if args.safe else None
    dims = [lo.shape[1] for _, lo, _ in layers if lo.shape[0]]
    if mc_points is not None and mc_points.shape[0]:
        dims.append(mc_points.shape[1])
    if safe is not None:
        dims.append(safe.dim)
    if any(d > 2 for d in dims) and args.proj is None:
        raise ValueError("data has more than 2 output dimensions; pass --proj i j")
    svg = render_svg(layers, mc_points, safe, proj)
    Path(args.out).write_text(svg, encoding="utf-8")
    return 0


def _add_common(parser, *, safe_required: bool) -> None:
    parser.add_argument("--model", required=True, help="model JSON path")
    parser.add_argument("--input", required=True, help='input box "lo,hi;lo,hi;..."')
    parser.add_argument(
        "--safe", required=safe_required, help='safe box "lo,hi;lo,hi;..."'
    )
    parser.add_argument("--grid", help="per-dim cell counts, e.g. 100 or 100,50")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reachbound", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="verify one problem and emit a verdict")
    _add_common(p, safe_required=True)
    p.add_argument("--domain", choices=("box", "zono"), default="box")
    p.add_argument("--mode", choices=("boundary", "subset", "full", "auto"), default="auto")
    p.add_argument("--max-refine", type=int, default=0)
    p.add_argument("--falsify-samples", type=int, default=0)
    p.add_argument("--out", help="write the verdict JSON here too")
    p.add_argument("--cells-out", help="write per-cell reach hulls CSV")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="run boundary, subset and full at equal cell width")
    _add_common(p, safe_required=True)
    p.add_argument("--domain", choices=("box", "zono"), default="box")
    p.add_argument("--out", help="write the comparison rows as JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("certify", help="per-cell homeomorphism certification")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--grid")
    p.add_argument("--out", help="write the per-cell CSV here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("mc", help="Monte-Carlo image sampling")
    _add_common(p, safe_required=False)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--out", help="write sampled points CSV")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("plot", help="render reach cells, MC points and safe box to SVG")
    p.add_argument("--full-cells", help="reach-cell CSV drawn in blue")
    p.add_argument("--partial-cells", help="boundary/subset reach-cell CSV drawn in red")
    p.add_argument("--mc", help="MC points CSV drawn in yellow")
    p.add_argument("--safe", help="safe box outline drawn in green")
    p.add_argument("--proj", type=int, nargs=2, help="output dims to project onto")
    p.add_argument("--out", required=True, help="SVG output path")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
