"""Boundary faces, grid partitions, interval Jacobians and certification.

A network restricted to a cell is certified as a homeomorphism onto its image
when the interval enclosure of its Jacobian determinant over the cell excludes
zero.  Certification requires a square network with at most 6 inputs (the
determinant enclosure uses cofactor expansion).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .intervals import (
    Box,
    Interval,
    IntervalMatrix,
    _act_deriv_arrays,
    _act_range_arrays,
    _DET_MAX_DIM,
    _idet_arrays,
    _imat_matmul_arrays,
    _imul_arrays,
    _interval_matvec_arrays,
)
from .network import Network

__all__ = [
    "boundary_faces",
    "CellGrid",
    "partition",
    "jacobian_interval",
    "certify_homeomorphism",
    "certify_cells",
    "CertificationResult",
    "SubsetExtraction",
    "extract_subset",
]


def boundary_faces(box: Box) -> list[Box]:
    """The 2n degenerate boxes whose union is the boundary of an n-box."""
    if box.degenerate_dims():
        raise ValueError("boundary faces require a box that is non-degenerate in every dimension")
    faces = []
    for k in range(box.dim):
        for v in (box.dims[k].lo, box.dims[k].hi):
            pinned = box.dims[:k] + (Interval.point(v),) + box.dims[k + 1 :]
            faces.append(Box(pinned))
    return faces


@dataclass(frozen=True)
class CellGrid:
    """Uniform grid of closed cells tiling `base` exactly (shared edges)."""

    base: Box
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.base.dim:
            raise ValueError("one subdivision count per dimension required")
        if any(c < 1 for c in self.counts):
            raise ValueError("subdivision counts must be at least 1")
        edges = []
        for k, c in enumerate(self.counts):
            iv = self.base.dims[k]
            if iv.lo == iv.hi and c != 1:
                raise ValueError(f"degenerate dimension {k} must have count 1")
            e = iv.lo + np.arange(c + 1) * ((iv.hi - iv.lo) / c)
            e[-1] = iv.hi  # exact tiling of the base box
            e.setflags(write=False)
            edges.append(e)
        object.__setattr__(self, "_edges", tuple(edges))

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def total(self) -> int:
        return int(np.prod(self.counts))

    def edges(self, k: int) -> np.ndarray:
        return self._edges[k]

    def cell(self, index) -> Box:
        index = tuple(int(i) for i in index)
        dims = []
        for k, i in enumerate(index):
            if not 0 <= i < self.counts[k]:
                raise IndexError(f"cell index {index} out of range for counts {self.counts}")
            e = self.edges(k)
            dims.append(Interval(float(e[i]), float(e[i + 1])))
        return Box(tuple(dims))

    def indices(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(c) for c in self.counts))

    def cells(self) -> Iterator[tuple[tuple[int, ...], Box]]:
        for idx in self.indices():
            yield idx, self.cell(idx)

    def bounds_arrays(self):
        """Row-major (indices, lo, hi) arrays for all cells at once."""
        per_dim = [self.edges(k) for k in range(self.dim)]
        grids = np.meshgrid(*(np.arange(c) for c in self.counts), indexing="ij")
        idx = np.stack([g.ravel() for g in grids], axis=1)
        lo = np.stack([per_dim[k][idx[:, k]] for k in range(self.dim)], axis=1)
        hi = np.stack([per_dim[k][idx[:, k] + 1] for k in range(self.dim)], axis=1)
        return idx, lo, hi

    def interior_mask(self, idx: np.ndarray) -> np.ndarray:
        """True where a cell index touches no face of the base box."""
        counts = np.asarray(self.counts)
        return np.all((idx > 0) & (idx + 1 < counts), axis=1)


def partition(box: Box, counts) -> CellGrid:
    return CellGrid(box, tuple(int(c) for c in counts))


# ---------------------------------------------------------------------------
# interval Jacobians and certification


def _check_certifiable(net: Network) -> None:
    if not net.is_square:
        raise ValueError(
            f"Jacobian certification requires a square network, got "
            f"{net.input_dim} -> {net.output_dim}"
        )
    if net.input_dim > _DET_MAX_DIM:
        raise ValueError(f"certification unsupported above dimension {_DET_MAX_DIM}")


def jacobian_interval_arrays(net: Network, lo: np.ndarray, hi: np.ndarray):
    """Enclose the Jacobian over batched cells (..., n); returns (..., n, n)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = net.input_dim
    eye = np.broadcast_to(np.eye(n), lo.shape[:-1] + (n, n)).copy()
    jlo, jhi = eye, eye.copy()
    for layer in net.layers:
        zlo, zhi = _interval_matvec_arrays(layer.weights, layer.bias, lo, hi)
        dlo, dhi = _act_deriv_arrays(layer.activation, zlo, zhi)
        vlo, vhi = _imul_arrays(
            dlo[..., :, None], dhi[..., :, None], layer.weights, layer.weights
        )
        jlo, jhi = _imat_matmul_arrays(vlo, vhi, jlo, jhi)
        lo, hi = _act_range_arrays(layer.activation, zlo, zhi)
    return jlo, jhi


def jacobian_interval(net: Network, cell: Box) -> IntervalMatrix:
    _check_certifiable(net)
    if cell.dim != net.input_dim:
        raise ValueError(f"cell dimension {cell.dim} != input dim {net.input_dim}")
    jlo, jhi = jacobian_interval_arrays(net, cell.lo, cell.hi)
    return IntervalMatrix(jlo, jhi)


@dataclass(frozen=True)
class CertificationResult:
    """Interval determinant over a cell plus the certified verdict."""

    cell: Box
    det_interval: Interval
    certified: bool


def certify_homeomorphism(net: Network, cell: Box) -> CertificationResult:
    det = jacobian_interval(net, cell).det()
    return CertificationResult(cell, det, not det.contains_zero())


def certify_cells(net: Network, lo: np.ndarray, hi: np.ndarray):
    """Batch certification; returns (det_lo, det_hi, certified) arrays."""
    _check_certifiable(net)
    jlo, jhi = jacobian_interval_arrays(net, lo, hi)
    dlo, dhi = _idet_arrays(jlo, jhi)
    certified = (dlo > 0.0) | (dhi < 0.0)
    return dlo, dhi, certified


# ---------------------------------------------------------------------------
# homeomorphic-subset extraction


@dataclass(frozen=True)
class SubsetExtraction:
    """Grid classification into a certified interior subset and the kept rest.

    A certified cell that touches the boundary of the base box is kept, not
    removed: the removable subset must stay clear of the input boundary, and
    touching is decided on grid indices, never on float comparisons.
    """

    grid: CellGrid
    index: np.ndarray  # (N, n) row-major cell indices
    det_lo: np.ndarray
    det_hi: np.ndarray
    certified: np.ndarray  # (N,) bool, determinant excludes zero
    interior: np.ndarray  # (N,) bool, no face on the base boundary

    @property
    def certified_interior_mask(self) -> np.ndarray:
        return self.certified & self.interior

    @property
    def kept_mask(self) -> np.ndarray:
        return ~self.certified_interior_mask

    @property
    def counts(self) -> dict:
        total = int(self.certified.shape[0])
        removed = int(self.certified_interior_mask.sum())
        return {"total": total, "certified_interior": removed, "kept": total - removed}

    def certified_cells(self) -> Iterator[Box]:
        for i in np.flatnonzero(self.certified_interior_mask):
            yield self.grid.cell(self.index[i])

    def kept_cells(self) -> Iterator[Box]:
        for i in np.flatnonzero(self.kept_mask):
            yield self.grid.cell(self.index[i])


def extract_subset(net: Network, input_box: Box, counts) -> SubsetExtraction:
    """Classify grid cells; the kept cells cover the closure of the rest."""
    if input_box.degenerate_dims():
        raise ValueError("subset extraction requires a non-degenerate input box")
    grid = partition(input_box, counts)
    idx, lo, hi = grid.bounds_arrays()
    det_lo, det_hi, certified = certify_cells(net, lo, hi)
    return SubsetExtraction(grid, idx, det_lo, det_hi, certified, grid.interior_mask(idx))
