"""Machine-readable outputs: verdict JSON, cell/point CSV dumps, SVG plots.

All writers are deterministic for fixed inputs: floats are emitted with
``repr`` (shortest round-trip form) in CSV/JSON and with a fixed ``%.6g``
format inside SVG geometry, and element order follows input order.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Optional, Sequence

import numpy as np

from .intervals import Box
from .verifier import CellBatch, MonteCarloResult, Verdict

__all__ = [
    "verdict_document",
    "write_verdict",
    "write_reach_cells",
    "read_reach_cells",
    "write_certification",
    "write_mc_points",
    "read_mc_points",
    "render_svg",
]

# fixed legend: full-set cells blue, boundary/subset cells red,
# safe box green, Monte-Carlo points yellow
CELL_FULL_COLOR = "blue"
CELL_PARTIAL_COLOR = "red"
SAFE_COLOR = "green"
MC_COLOR = "yellow"


def _hull_list(box: Optional[Box]):
    if box is None:
        return None
    return [[d.lo, d.hi] for d in box.dims]


def verdict_document(verdict: Verdict) -> dict:
    stats = verdict.stats
    doc = {
        "status": verdict.status,
        "stats": {
            "cells": stats.get("cells_propagated"),
            "certified": stats.get("cells_certified"),
            "kept": stats.get("cells_kept"),
            "refinement_level": stats.get("refinement_level", 0),
            "wall_ms": stats.get("wall_ms"),
        },
        "output_hull": _hull_list(verdict.output_hull),
        "counterexample": None
        if verdict.counterexample is None
        else [float(v) for v in verdict.counterexample],
    }
    for key in ("mode", "path", "assumes_invertible", "fallback_full", "input_certified",
                "cells_total"):
        if key in stats:
            doc["stats"][key] = stats[key]
    return doc


def write_verdict(verdict: Verdict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(verdict_document(verdict), fh, indent=1)
        fh.write("\n")


def write_reach_cells(batch: CellBatch, path) -> None:
    """Per-cell dump: grid indices then output hull bounds per dimension."""
    n = batch.index.shape[1]
    m = batch.out_lo.shape[1]
    header = [f"idx{k}" for k in range(n)]
    for j in range(m):
        header += [f"out{j}_lo", f"out{j}_hi"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(batch.count):
            row = [int(v) for v in batch.index[i]]
            for j in range(m):
                row += [repr(float(batch.out_lo[i, j])), repr(float(batch.out_hi[i, j]))]
            writer.writerow(row)


def read_reach_cells(path):
    """Read a reach-cell CSV back into (indices, out_lo, out_hi) arrays."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"empty cell CSV: {path}")
    header = rows[0]
    n = sum(1 for h in header if h.startswith("idx"))
    m = (len(header) - n) // 2
    data = rows[1:]
    idx = np.array([[int(r[k]) for k in range(n)] for r in data], dtype=int).reshape(len(data), n)
    lo = np.array([[float(r[n + 2 * j]) for j in range(m)] for r in data]).reshape(len(data), m)
    hi = np.array([[float(r[n + 2 * j + 1]) for j in range(m)] for r in data]).reshape(len(data), m)
    return idx, lo, hi


def write_certification(extraction, path) -> None:
    """Per-cell certification dump: indices, determinant bounds, verdict bit."""
    n = extraction.index.shape[1]
    header = [f"idx{k}" for k in range(n)] + ["det_lo", "det_hi", "certified"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(extraction.index.shape[0]):
            row = [int(v) for v in extraction.index[i]]
            row += [
                repr(float(extraction.det_lo[i])),
                repr(float(extraction.det_hi[i])),
                int(extraction.certified[i]),
            ]
            writer.writerow(row)


def write_mc_points(result: MonteCarloResult, path) -> None:
    n = result.points.shape[1]
    m = result.images.shape[1]
    header = [f"x{k}" for k in range(n)] + [f"y{j}" for j in range(m)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for p, q in zip(result.points, result.images):
            writer.writerow([repr(float(v)) for v in p] + [repr(float(v)) for v in q])


def read_mc_points(path) -> np.ndarray:
    """Read the image points (y columns) of an MC dump."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    ycols = [k for k, h in enumerate(header) if h.startswith("y")]
    return np.array([[float(r[k]) for k in ycols] for r in rows[1:]]).reshape(
        len(rows) - 1, len(ycols)
    )


# ---------------------------------------------------------------------------
# SVG rendering


_WIDTH, _HEIGHT, _MARGIN = 640.0, 480.0, 50.0


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Frame:
    def __init__(self, xlim, ylim):
        self.xmin, self.xmax = xlim
        self.ymin, self.ymax = ylim

    def x(self, v: float) -> float:
        return _MARGIN + (v - self.xmin) / (self.xmax - self.xmin) * (_WIDTH - 2 * _MARGIN)

    def y(self, v: float) -> float:
        return _HEIGHT - _MARGIN - (v - self.ymin) / (self.ymax - self.ymin) * (
            _HEIGHT - 2 * _MARGIN
        )


def _expand(lim):
    lo, hi = lim
    if not np.isfinite(lo) or not np.isfinite(hi):
        return 0.0, 1.0
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render_svg(
    cell_layers: Sequence[tuple[str, np.ndarray, np.ndarray]] = (),
    mc_points: Optional[np.ndarray] = None,
    safe_box: Optional[Box] = None,
    proj: tuple[int, int] = (0, 1),
) -> str:
    """Render reach cells, MC image points and a safe box into an SVG string.

    `cell_layers` holds (color, out_lo, out_hi) triples with (N, m) bounds;
    the two projected output dimensions are taken from `proj`.
    """
    px, py = proj
    xs, ys = [], []
    for _, lo, hi in cell_layers:
        if lo.shape[0]:
            xs += [lo[:, px].min(), hi[:, px].max()]
            ys += [lo[:, py].min(), hi[:, py].max()]
    if mc_points is not None and mc_points.shape[0]:
        xs += [mc_points[:, px].min(), mc_points[:, px].max()]
        ys += [mc_points[:, py].min(), mc_points[:, py].max()]
    if safe_box is not None:
        xs += [safe_box.dims[px].lo, safe_box.dims[px].hi]
        ys += [safe_box.dims[py].lo, safe_box.dims[py].hi]
    frame = _Frame(
        _expand((min(xs), max(xs)) if xs else (0.0, 1.0)),
        _expand((min(ys), max(ys)) if ys else (0.0, 1.0)),
    )

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(_WIDTH)}" '
        f'height="{_fmt(_HEIGHT)}" viewBox="0 0 {_fmt(_WIDTH)} {_fmt(_HEIGHT)}">\n'
    )
    out.write(
        f'<rect class="frame" x="{_fmt(_MARGIN)}" y="{_fmt(_MARGIN)}" '
        f'width="{_fmt(_WIDTH - 2 * _MARGIN)}" height="{_fmt(_HEIGHT - 2 * _MARGIN)}" '
        'fill="white" stroke="black"/>\n'
    )
    for color, lo, hi in cell_layers:
        for i in range(lo.shape[0]):
            x0, x1 = frame.x(lo[i, px]), frame.x(hi[i, px])
            y0, y1 = frame.y(hi[i, py]), frame.y(lo[i, py])
            out.write(
                f'<rect class="cell" x="{_fmt(x0)}" y="{_fmt(y0)}" '
                f'width="{_fmt(max(x1 - x0, 0.1))}" height="{_fmt(max(y1 - y0, 0.1))}" '
                f'fill="{color}" fill-opacity="0.45" stroke="none"/>\n'
            )
    if mc_points is not None:
        for p in mc_points:
            out.write(
                f'<circle class="mc" cx="{_fmt(frame.x(p[px]))}" cy="{_fmt(frame.y(p[py]))}" '
                f'r="1.2" fill="{MC_COLOR}"/>\n'
            )
    if safe_box is not None:
        x0, x1 = frame.x(safe_box.dims[px].lo), frame.x(safe_box.dims[px].hi)
        y0, y1 = frame.y(safe_box.dims[py].hi), frame.y(safe_box.dims[py].lo)
        out.write(
            f'<rect class="safe" x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(y1 - y0)}" fill="none" stroke="{SAFE_COLOR}" stroke-width="2"/>\n'
        )
    for label, sx, sy, anchor in (
        (_fmt(frame.xmin), _MARGIN, _HEIGHT - _MARGIN + 16, "start"),
        (_fmt(frame.xmax), _WIDTH - _MARGIN, _HEIGHT - _MARGIN + 16, "end"),
        (_fmt(frame.ymin), _MARGIN - 4, _HEIGHT - _MARGIN, "end"),
        (_fmt(frame.ymax), _MARGIN - 4, _MARGIN + 10, "end"),
    ):
        out.write(
            f'<text class="axis" x="{_fmt(sx)}" y="{_fmt(sy)}" font-size="12" '
            f'text-anchor="{anchor}">{label}</text>\n'
        )
    out.write("</svg>\n")
    return out.getvalue()
