"""Verification drivers: boundary-only, certified-subset, full-set, auto.

Soundness contract: a `safe` verdict means the computed over-approximation of
the required input region lies inside the safe box.  For the boundary driver
that conclusion is only valid when the network is a homeomorphism on the input
box; invoked directly it records ``assumes_invertible`` in its stats and
leaves that obligation to the caller, while the auto driver discharges it by
certifying the whole input box first.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .domains import (
    Box,
    ReachSet,
    box_propagate_arrays,
    normalize_domain,
    zono_propagate,
)
from .network import Network, forward_batch, forward_point
from .topology import (
    CellGrid,
    SubsetExtraction,
    boundary_faces,
    certify_homeomorphism,
    extract_subset,
    partition,
    _DET_MAX_DIM,
)

__all__ = [
    "SAFE",
    "UNKNOWN",
    "FALSIFIED",
    "VerificationProblem",
    "Verdict",
    "CellBatch",
    "check_inclusion",
    "propagate_cells",
    "boundary_cell_batch",
    "grid_cell_batch",
    "verify_boundary",
    "verify_subset",
    "verify_full",
    "verify_auto",
    "verify",
    "MonteCarloResult",
    "monte_carlo",
]

SAFE = "safe"
UNKNOWN = "unknown"
FALSIFIED = "falsified"

MODES = ("boundary", "subset", "full", "auto")


@dataclass(frozen=True)
class VerificationProblem:
    net: Network
    input_box: Box
    safe_box: Box
    domain: str = "box"
    mode: str = "auto"
    grid: Optional[tuple[int, ...]] = None
    max_refinements: int = 0
    seed: int = 0
    falsify_samples: int = 0  # 0 disables counterexample search

    def __post_init__(self):
        if self.input_box.dim != self.net.input_dim:
            raise ValueError("input box dimension does not match the network")
        if self.safe_box.dim != self.net.output_dim:
            raise ValueError("safe box dimension does not match the network output")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "domain", normalize_domain(self.domain))
        grid = self.grid
        grid = (1,) * self.input_box.dim if grid is None else tuple(int(c) for c in grid)
        if len(grid) == 1 and self.input_box.dim > 1:
            grid = grid * self.input_box.dim
        if len(grid) != self.input_box.dim or any(c < 1 for c in grid):
            raise ValueError("grid needs one positive count per input dimension")
        object.__setattr__(self, "grid", grid)


@dataclass
class CellBatch:
    """Cells to propagate, as arrays, with lattice indices for reporting."""

    index: np.ndarray  # (N, n) integer labels
    lo: np.ndarray  # (N, n)
    hi: np.ndarray  # (N, n)
    out_lo: Optional[np.ndarray] = None  # filled by propagate_cells
    out_hi: Optional[np.ndarray] = None
    domain: str = "box"
    payloads: Optional[list] = None  # zonotopes, in row order

    @property
    def count(self) -> int:
        return int(self.lo.shape[0])

    def reach_sets(self) -> list[ReachSet]:
        sets = []
        for i in range(self.count):
            cell = Box.from_arrays(self.lo[i], self.hi[i])
            if self.payloads is not None:
                sets.append(ReachSet(self.domain, self.payloads[i], cell))
            else:
                sets.append(ReachSet("box", Box.from_arrays(self.out_lo[i], self.out_hi[i]), cell))
        return sets

    def hull(self) -> Box:
        return Box.from_arrays(self.out_lo.min(axis=0), self.out_hi.max(axis=0))


@dataclass
class Verdict:
    status: str
    stats: dict
    output_hull: Optional[Box]
    counterexample: Optional[np.ndarray] = None
    cell_batch: Optional[CellBatch] = None  # reporting hook
    extraction: Optional[SubsetExtraction] = None


def grid_cell_batch(grid: CellGrid) -> CellBatch:
    idx, lo, hi = grid.bounds_arrays()
    return CellBatch(idx, lo, hi)


def boundary_cell_batch(input_box: Box, counts: Sequence[int]) -> CellBatch:
    """All boundary-face cells of a box partition.

    Each face is partitioned with the pinned dimension forced to count 1; the
    lattice index of a face cell uses 0 for a low face and counts[k] for a
    high face in the pinned dimension k.
    """
    faces = boundary_faces(input_box)
    parts = []
    for f, face in enumerate(faces):
        k, side = divmod(f, 2)
        face_counts = tuple(1 if j == k else counts[j] for j in range(input_box.dim))
        idx, lo, hi = partition(face, face_counts).bounds_arrays()
        idx = idx.copy()
        idx[:, k] = 0 if side == 0 else counts[k]
        parts.append((idx, lo, hi))
    return CellBatch(
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
    )


def propagate_cells(net: Network, batch: CellBatch, domain: str) -> CellBatch:
    domain = normalize_domain(domain)
    batch.domain = domain
    if domain == "box":
        batch.out_lo, batch.out_hi = box_propagate_arrays(net, batch.lo, batch.hi)
        return batch
    payloads = []
    out_lo = np.empty((batch.count, net.output_dim))
    out_hi = np.empty_like(out_lo)
    for i in range(batch.count):
        z = zono_propagate(net, Box.from_arrays(batch.lo[i], batch.hi[i]))
        payloads.append(z)
        out_lo[i], out_hi[i] = z.hull_arrays()
    batch.payloads = payloads
    batch.out_lo, batch.out_hi = out_lo, out_hi
    return batch


def check_inclusion(sets: Sequence[ReachSet], safe: Box) -> bool:
    """True iff every reach set's interval hull lies inside the safe box."""
    for rs in sets:
        hull = rs.hull()
        if hull.dim != safe.dim:
            raise ValueError("reach set and safe box dimensions differ")
        if not safe.contains_box(hull):
            return False
    return True


def _inclusion_arrays(out_lo, out_hi, safe: Box) -> bool:
    if out_lo.shape[1] != safe.dim:
        raise ValueError("reach set and safe box dimensions differ")
    return bool(np.all(out_lo >= safe.lo) and np.all(out_hi <= safe.hi))


# ---------------------------------------------------------------------------
# Monte-Carlo estimation and falsification


@dataclass
class MonteCarloResult:
    points: np.ndarray
    images: np.ndarray
    image_hull: Box
    violations: np.ndarray  # inputs whose images leave the safe box


def monte_carlo(
    net: Network, region: Box, n: int, seed: int, safe: Optional[Box] = None
) -> MonteCarloResult:
    """Deterministic uniform sampling of a box and its exact float images.

    The counter-based Philox generator makes the sample sequence a pure
    function of the seed, independent of batching.
    """
    if n < 1:
        raise ValueError("sample count must be at least 1")
    rng = np.random.Generator(np.random.Philox(seed))
    lo, hi = region.lo, region.hi
    points = lo + rng.random((n, region.dim)) * (hi - lo)
    images = forward_batch(net, points)
    hull = Box.from_arrays(images.min(axis=0), images.max(axis=0))
    if safe is None:
        violations = np.empty((0, region.dim))
    else:
        bad = np.any(images < safe.lo, axis=1) | np.any(images > safe.hi, axis=1)
        violations = points[bad]
    return MonteCarloResult(points, images, hull, violations)


def _finalize(problem: VerificationProblem, verdict: Verdict, started: float) -> Verdict:
    if verdict.status == UNKNOWN and problem.falsify_samples > 0:
        mc = monte_carlo(
            problem.net,
            problem.input_box,
            problem.falsify_samples,
            problem.seed,
            safe=problem.safe_box,
        )
        for x in mc.violations:
            # promote only on an exact point re-check
            if not problem.safe_box.contains_point(forward_point(problem.net, x)):
                verdict.status = FALSIFIED
                verdict.counterexample = x
                break
    verdict.stats["wall_ms"] = (time.perf_counter() - started) * 1e3
    return verdict


def _run_batch(problem: VerificationProblem, batch: CellBatch, stats: dict) -> Verdict:
    batch = propagate_cells(problem.net, batch, problem.domain)
    ok = _inclusion_arrays(batch.out_lo, batch.out_hi, problem.safe_box)
    stats.setdefault("cells_propagated", batch.count)
    stats.setdefault("refinement_level", 0)
    return Verdict(SAFE if ok else UNKNOWN, stats, batch.hull(), cell_batch=batch)


# ---------------------------------------------------------------------------
# drivers


def verify_boundary(problem: VerificationProblem, _certified: bool = False) -> Verdict:
    """Propagate only the input boundary; valid when the map is invertible."""
    started = time.perf_counter()
    batch = boundary_cell_batch(problem.input_box, problem.grid)
    stats = {"mode": "boundary", "assumes_invertible": not _certified}
    return _finalize(problem, _run_batch(problem, batch, stats), started)


def verify_full(problem: VerificationProblem) -> Verdict:
    started = time.perf_counter()
    batch = grid_cell_batch(partition(problem.input_box, problem.grid))
    stats = {"mode": "full"}
    return _finalize(problem, _run_batch(problem, batch, stats), started)


def verify_subset(problem: VerificationProblem) -> Verdict:
    """Propagate only the cells kept after removing a certified interior subset."""
    started = time.perf_counter()
    net = problem.net
    if not net.is_square or net.input_dim > _DET_MAX_DIM:
        fallback = verify_full(replace(problem, mode="full"))
        fallback.stats["mode"] = "subset"
        fallback.stats["fallback_full"] = True
        return fallback
    extraction = extract_subset(net, problem.input_box, problem.grid)
    kept = extraction.kept_mask
    _, lo, hi = extraction.grid.bounds_arrays()
    batch = CellBatch(extraction.index[kept], lo[kept], hi[kept])
    stats = {
        "mode": "subset",
        "cells_total": extraction.counts["total"],
        "cells_certified": extraction.counts["certified_interior"],
        "cells_kept": extraction.counts["kept"],
    }
    verdict = _run_batch(problem, batch, stats)
    verdict.extraction = extraction
    return _finalize(problem, verdict, started)


def verify_auto(problem: VerificationProblem) -> Verdict:
    """Certify the whole input box, pick boundary or subset, refine on Unknown."""
    started = time.perf_counter()
    net = problem.net
    certified = False
    if net.is_square and net.input_dim <= _DET_MAX_DIM:
        certified = certify_homeomorphism(net, problem.input_box).certified
    verdict = None
    for level in range(problem.max_refinements + 1):
        counts = tuple(c * 2**level for c in problem.grid)
        sub = replace(problem, grid=counts, falsify_samples=0)
        if certified:
            verdict = verify_boundary(sub, _certified=True)
        else:
            verdict = verify_subset(sub)
        verdict.stats["refinement_level"] = level
        verdict.stats["mode"] = "auto"
        verdict.stats["path"] = "boundary" if certified else "subset"
        verdict.stats["input_certified"] = certified
        if verdict.status == SAFE:
            break
    return _finalize(problem, verdict, started)


_DRIVERS = {
    "boundary": verify_boundary,
    "subset": verify_subset,
    "full": verify_full,
    "auto": verify_auto,
}


def verify(problem: VerificationProblem) -> Verdict:
    return _DRIVERS[problem.mode](problem)
