"""Validated interval arithmetic: scalar intervals, boxes, interval matrices.

Every operation returns an enclosure of the true real-arithmetic result set.
IEEE-exact operations (+, -, *) are widened by one `nextafter` step per
endpoint; libm-backed evaluations (tanh, sigmoid and their derivatives) are
only faithfully rounded, so their endpoints get a wider fixed pad.  Reductions
(dot products, sums) are bounded with a standard a-priori rounding-error term
instead of per-term nudging, which keeps them vectorizable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Interval",
    "Box",
    "IntervalMatrix",
    "interval_combine",
    "interval_matmul",
    "interval_det",
    "act_range",
    "act_deriv_range",
    "activation_names",
    "activation_function",
    "activation_derivative",
]

_U = 2.0 ** -53  # unit roundoff, float64
_TINY = 5e-324  # one subnormal step, absolute slack per reduction term
_PAD_ACT = 4  # nextafter steps for direct libm evaluations
_PAD_DERIV = 8  # nextafter steps for composed derivative evaluations


def _down(x, steps: int = 1):
    for _ in range(steps):
        x = np.nextafter(x, -np.inf)
    return x


def _up(x, steps: int = 1):
    for _ in range(steps):
        x = np.nextafter(x, np.inf)
    return x


# ---------------------------------------------------------------------------
# scalar intervals


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lo, hi] with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"interval lower bound exceeds upper: [{self.lo}, {self.hi}]")

    @staticmethod
    def point(v: float) -> "Interval":
        return Interval(float(v), float(v))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def add(self, other: "Interval") -> "Interval":
        return Interval(float(_down(self.lo + other.lo)), float(_up(self.hi + other.hi)))

    def sub(self, other: "Interval") -> "Interval":
        return Interval(float(_down(self.lo - other.hi)), float(_up(self.hi - other.lo)))

    def mul(self, other: "Interval") -> "Interval":
        cands = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(float(_down(min(cands))), float(_up(max(cands))))

    def neg(self) -> "Interval":
        # exact in IEEE, no widening needed
        return Interval(-self.hi, -self.lo)

    def scale(self, factor: float) -> "Interval":
        if not math.isfinite(factor):
            raise ValueError("scale factor must be finite")
        a, b = self.lo * factor, self.hi * factor
        if a > b:
            a, b = b, a
        return Interval(float(_down(a)), float(_up(b)))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    __add__ = add
    __sub__ = sub
    __mul__ = mul
    __neg__ = neg

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def interval_combine(op: str, a: Interval, b=None) -> Interval:
    """Dispatch a binary/unary interval operation by name."""
    if op == "add":
        return a.add(b)
    if op == "sub":
        return a.sub(b)
    if op == "mul":
        return a.mul(b)
    if op == "neg":
        return a.neg()
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown interval operation {op!r}")


# ---------------------------------------------------------------------------
# boxes


@dataclass(frozen=True)
class Box:
    """Axis-aligned product of intervals; degenerate faces are allowed."""

    dims: tuple[Interval, ...]

    def __post_init__(self):
        if not self.dims:
            raise ValueError("box must have at least one dimension")

    @staticmethod
    def from_bounds(bounds: Iterable[Sequence[float]]) -> "Box":
        return Box(tuple(Interval(float(lo), float(hi)) for lo, hi in bounds))

    @staticmethod
    def from_arrays(lo: np.ndarray, hi: np.ndarray) -> "Box":
        lo = np.asarray(lo, dtype=float).ravel()
        hi = np.asarray(hi, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise ValueError("bound arrays must have matching shapes")
        return Box(tuple(Interval(float(a), float(b)) for a, b in zip(lo, hi)))

    @staticmethod
    def point(vec: Iterable[float]) -> "Box":
        return Box(tuple(Interval.point(v) for v in vec))

    @property
    def dim(self) -> int:
        return len(self.dims)

    @property
    def lo(self) -> np.ndarray:
        return np.array([d.lo for d in self.dims])

    @property
    def hi(self) -> np.ndarray:
        return np.array([d.hi for d in self.dims])

    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def is_degenerate(self, k: int) -> bool:
        return self.dims[k].lo == self.dims[k].hi

    def degenerate_dims(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.dim) if self.is_degenerate(k))

    def contains_point(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        self._check_dim(x.shape[-1])
        return bool(np.all(self.lo <= x) and np.all(x <= self.hi))

    def contains_box(self, other: "Box") -> bool:
        self._check_dim(other.dim)
        return all(a.encloses(b) for a, b in zip(self.dims, other.dims))

    def intersects(self, other: "Box") -> bool:
        # closed convention: shared faces and corners count
        self._check_dim(other.dim)
        return all(a.intersects(b) for a, b in zip(self.dims, other.dims))

    def hull(self, other: "Box") -> "Box":
        self._check_dim(other.dim)
        return Box(tuple(a.hull(b) for a, b in zip(self.dims, other.dims)))

    @staticmethod
    def hull_of(boxes: Iterable["Box"]) -> "Box":
        it = iter(boxes)
        try:
            acc = next(it)
        except StopIteration:
            raise ValueError("hull of empty collection") from None
        for b in it:
            acc = acc.hull(b)
        return acc

    def split(self) -> tuple["Box", "Box"]:
        """Bisect the widest dimension at its midpoint."""
        k = int(np.argmax(self.widths()))
        iv = self.dims[k]
        if iv.lo == iv.hi:
            raise ValueError("cannot split a point box")
        mid = min(max(iv.mid, iv.lo), iv.hi)
        left = self.dims[:k] + (Interval(iv.lo, mid),) + self.dims[k + 1 :]
        right = self.dims[:k] + (Interval(mid, iv.hi),) + self.dims[k + 1 :]
        return Box(left), Box(right)

    def _check_dim(self, d: int) -> None:
        if d != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {d}")

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.dims)

    def __repr__(self) -> str:
        return " x ".join(repr(d) for d in self.dims)


# ---------------------------------------------------------------------------
# vectorized enclosure helpers (lo/hi ndarray pairs, leading batch dims)


def _imul_arrays(alo, ahi, blo, bhi):
    """Elementwise interval product of broadcastable arrays."""
    c1 = alo * blo
    c2 = alo * bhi
    c3 = ahi * blo
    c4 = ahi * bhi
    lo = np.minimum(np.minimum(c1, c2), np.minimum(c3, c4))
    hi = np.maximum(np.maximum(c1, c2), np.maximum(c3, c4))
    return _down(lo), _up(hi)


def _sum_enclose(lo, hi, axis):
    """Interval sum along `axis` with an a-priori rounding-error bound."""
    k = lo.shape[axis]
    slo = lo.sum(axis=axis)
    shi = hi.sum(axis=axis)
    mag = np.maximum(np.abs(lo), np.abs(hi)).sum(axis=axis)
    err = (k + 2) * _U * mag + (k + 1) * _TINY
    return _down(slo - err), _up(shi + err)


def _imat_matmul_arrays(alo, ahi, blo, bhi):
    """Interval matrix product; inputs (..., m, k) and (..., k, n)."""
    plo, phi = _imul_arrays(
        alo[..., :, :, None], ahi[..., :, :, None], blo[..., None, :, :], bhi[..., None, :, :]
    )
    return _sum_enclose(plo, phi, axis=-2)


def _interval_matvec_arrays(w, b, xlo, xhi):
    """Enclose w @ x + b over per-row interval vectors x; x batched (..., k)."""
    wp = np.maximum(w, 0.0)
    wn = np.minimum(w, 0.0)
    lo = xlo @ wp.T + xhi @ wn.T
    hi = xhi @ wp.T + xlo @ wn.T
    mag = np.maximum(np.abs(xlo), np.abs(xhi)) @ np.abs(w).T
    k = w.shape[1]
    err = (2 * k + 6) * _U * (mag + np.abs(b)) + (2 * k + 4) * _TINY
    return _down(lo + b - err), _up(hi + b + err)


def _idet_arrays(lo, hi):
    """Interval determinant by first-row cofactor expansion; (..., n, n)."""
    n = lo.shape[-1]
    if n == 1:
        return lo[..., 0, 0], hi[..., 0, 0]
    acc_lo = None
    acc_hi = None
    for j in range(n):
        mlo = np.delete(lo[..., 1:, :], j, axis=-1)
        mhi = np.delete(hi[..., 1:, :], j, axis=-1)
        dlo, dhi = _idet_arrays(mlo, mhi)
        plo, phi = _imul_arrays(lo[..., 0, j], hi[..., 0, j], dlo, dhi)
        if j % 2 == 1:
            plo, phi = -phi, -plo
        if acc_lo is None:
            acc_lo, acc_hi = plo, phi
        else:
            acc_lo = _down(acc_lo + plo)
            acc_hi = _up(acc_hi + phi)
    return acc_lo, acc_hi


# ---------------------------------------------------------------------------
# interval matrices


_DET_MAX_DIM = 6


@dataclass(frozen=True)
class IntervalMatrix:
    """Rectangular matrix of intervals, stored as endpoint arrays."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.ndim != 2 or lo.shape != hi.shape:
            raise ValueError("interval matrix requires two 2-d endpoint arrays of equal shape")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("interval matrix entries must be finite")
        if np.any(lo > hi):
            raise ValueError("interval matrix has an entry with lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @staticmethod
    def from_point(w) -> "IntervalMatrix":
        w = np.asarray(w, dtype=float)
        return IntervalMatrix(w.copy(), w.copy())

    @staticmethod
    def from_intervals(rows: Sequence[Sequence[Interval]]) -> "IntervalMatrix":
        lo = np.array([[iv.lo for iv in row] for row in rows])
        hi = np.array([[iv.hi for iv in row] for row in rows])
        return IntervalMatrix(lo, hi)

    @staticmethod
    def identity(n: int) -> "IntervalMatrix":
        return IntervalMatrix.from_point(np.eye(n))

    @property
    def rows(self) -> int:
        return self.lo.shape[0]

    @property
    def cols(self) -> int:
        return self.lo.shape[1]

    def entry(self, i: int, j: int) -> Interval:
        return Interval(float(self.lo[i, j]), float(self.hi[i, j]))

    def matmul(self, other: "IntervalMatrix") -> "IntervalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"matmul dimension mismatch: {self.cols} vs {other.rows}")
        lo, hi = _imat_matmul_arrays(self.lo, self.hi, other.lo, other.hi)
        return IntervalMatrix(lo, hi)

    def det(self) -> Interval:
        if self.rows != self.cols:
            raise ValueError("determinant requires a square matrix")
        if self.rows > _DET_MAX_DIM:
            raise ValueError(
                f"determinant unsupported above dimension {_DET_MAX_DIM}, got {self.rows}"
            )
        lo, hi = _idet_arrays(self.lo, self.hi)
        return Interval(float(lo), float(hi))

    def encloses(self, other: "IntervalMatrix") -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))

    def __matmul__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        return self.matmul(other)


def interval_matmul(a: IntervalMatrix, b: IntervalMatrix) -> IntervalMatrix:
    return a.matmul(b)


def interval_det(m: IntervalMatrix) -> Interval:
    return m.det()


# ---------------------------------------------------------------------------
# activations and their enclosures


def _sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _tanh_deriv(x):
    # sech^2 keeps relative accuracy where 1 - tanh^2 cancels to zero
    with np.errstate(over="ignore"):
        s = 1.0 / np.cosh(np.asarray(x, dtype=float))
    return s * s


def _sigmoid_deriv(x):
    x = np.asarray(x, dtype=float)
    return _sigmoid(x) * _sigmoid(-x)


def _identity(x):
    return np.asarray(x, dtype=float).copy()


def _ones_like(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class _Activation:
    f: Callable
    deriv: Callable
    deriv_max: float
    clip_lo: float
    clip_hi: float
    linear: bool = False


_ACTIVATIONS = {
    "tanh": _Activation(np.tanh, _tanh_deriv, 1.0, -1.0, 1.0),
    "sigmoid": _Activation(_sigmoid, _sigmoid_deriv, 0.25, 0.0, 1.0),
    "linear": _Activation(_identity, _ones_like, 1.0, -math.inf, math.inf, linear=True),
}


def activation_names() -> tuple[str, ...]:
    return tuple(_ACTIVATIONS)


def _lookup(name: str) -> _Activation:
    try:
        return _ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}") from None


def activation_function(name: str) -> Callable:
    return _lookup(name).f


def activation_derivative(name: str) -> Callable:
    return _lookup(name).deriv


def _act_range_arrays(name: str, lo, hi):
    """Range enclosure of a monotone activation over [lo, hi] arrays."""
    act = _lookup(name)
    if act.linear:
        return np.asarray(lo, dtype=float).copy(), np.asarray(hi, dtype=float).copy()
    flo = act.f(lo)
    fhi = act.f(hi)
    out_lo = np.maximum(_down(flo, _PAD_ACT), act.clip_lo)
    out_hi = np.minimum(_up(fhi, _PAD_ACT), act.clip_hi)
    return np.minimum(out_lo, out_hi), out_hi


def _act_deriv_arrays(name: str, lo, hi):
    """Enclosure of the activation derivative over [lo, hi] arrays.

    tanh' and sigmoid' are even and unimodal with their maximum at zero, so
    the supremum is the exact peak value when the interval straddles zero and
    an endpoint value otherwise; the infimum is always at an endpoint.
    """
    act = _lookup(name)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if act.linear:
        return np.ones_like(lo), np.ones_like(hi)
    dlo = act.deriv(lo)
    dhi = act.deriv(hi)
    out_lo = np.maximum(_down(np.minimum(dlo, dhi), _PAD_DERIV), 0.0)
    capped = np.minimum(_up(np.maximum(dlo, dhi), _PAD_DERIV), act.deriv_max)
    straddle = (lo <= 0.0) & (0.0 <= hi)
    out_hi = np.where(straddle, act.deriv_max, capped)
    return out_lo, np.maximum(out_hi, out_lo)


def act_range(name: str, x: Interval) -> Interval:
    lo, hi = _act_range_arrays(name, np.array(x.lo), np.array(x.hi))
    return Interval(float(lo), float(hi))


def act_deriv_range(name: str, x: Interval) -> Interval:
    lo, hi = _act_deriv_arrays(name, np.array(x.lo), np.array(x.hi))
    return Interval(float(lo), float(hi))
