"""Interval arithmetic, interval matrices and matrix operator norms.

Intervals use round-to-nearest floating point. Comparisons that need slack
use ``TAU_NUM``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

TAU_NUM = 1e-9

SPECTRAL_TOL = 1e-10
SPECTRAL_MAX_ITER = 10_000


class DimensionMismatchError(ValueError):
    """Operand shapes are incompatible."""


class SpectralNormWarning(RuntimeWarning):
    """Power iteration did not converge; the Frobenius norm was used instead."""


@dataclass(frozen=True)
class Interval:
    """Closed real interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: float) -> Interval:
        return cls(value, value)

    def __add__(self, other: Interval) -> Interval:
        return iv_add(self, other)

    def __mul__(self, other: Interval) -> Interval:
        return iv_mul(self, other)

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def contains(self, other: Interval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __iter__(self):
        yield self.lo
        yield self.hi


def iv_add(p: Interval, q: Interval) -> Interval:
    return Interval(p.lo + q.lo, p.hi + q.hi)


def iv_mul(p: Interval, q: Interval) -> Interval:
    products = (p.lo * q.lo, p.lo * q.hi, p.hi * q.lo, p.hi * q.hi)
    return Interval(min(products), max(products))


def iv_scale(c: float, p: Interval) -> Interval:
    a, b = c * p.lo, c * p.hi
    # + 0.0 folds -0.0 into 0.0
    return Interval(min(a, b) + 0.0, max(a, b) + 0.0)


class IntervalMatrix:
    """Matrix of intervals stored as a pair of read-only endpoint arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = np.array(lo, dtype=float, ndmin=2)
        hi = lo.copy() if hi is None else np.array(hi, dtype=float, ndmin=2)
        if lo.shape != hi.shape:
            raise DimensionMismatchError(f"endpoint shapes differ: {lo.shape} vs {hi.shape}")
        if lo.ndim != 2 or lo.size == 0:
            raise ValueError("interval matrix must be a nonempty 2-D grid")
        if not np.all(lo <= hi):
            raise ValueError("every entry must satisfy lo <= hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_intervals(cls, rows: Sequence[Sequence[Interval]]) -> IntervalMatrix:
        lo = [[iv.lo for iv in row] for row in rows]
        hi = [[iv.hi for iv in row] for row in rows]
        return cls(lo, hi)

    @property
    def shape(self) -> tuple[int, int]:
        return self.lo.shape

    def __getitem__(self, index: tuple[int, int]) -> Interval:
        return Interval(float(self.lo[index]), float(self.hi[index]))

    def contains(self, matrix) -> bool:
        matrix = np.asarray(matrix, dtype=float)
        return matrix.shape == self.shape and bool(np.all((self.lo <= matrix) & (matrix <= self.hi)))

    def __eq__(self, other):
        if not isinstance(other, IntervalMatrix):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __repr__(self):
        return f"IntervalMatrix(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


def imat_mul_real_left(W, M: IntervalMatrix) -> IntervalMatrix:
    """Return ``W @ [M]`` for a real matrix ``W``.

    Each entry is the interval sum of ``iv_scale(W[i, k], M[k, j])`` over ``k``:
    positive weights pick the same endpoint, negative weights the opposite one.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[1] != M.shape[0]:
        raise DimensionMismatchError(f"cannot multiply {W.shape} by {M.shape}")
    pos = np.maximum(W, 0.0)
    neg = np.minimum(W, 0.0)
    lo = pos @ M.lo + neg @ M.hi
    hi = pos @ M.hi + neg @ M.lo
    return IntervalMatrix(lo, hi)


def imat_mul_diag_left(d_lo, d_hi, M: IntervalMatrix) -> IntervalMatrix:
    """Return ``diag([d]) @ [M]``: row ``i`` of ``M`` times the interval ``[d_i]``."""
    d_lo = np.asarray(d_lo, dtype=float)[:, None]
    d_hi = np.asarray(d_hi, dtype=float)[:, None]
    if d_lo.shape[0] != M.shape[0]:
        raise DimensionMismatchError(f"diagonal of length {d_lo.shape[0]} vs {M.shape}")
    products = np.stack([d_lo * M.lo, d_lo * M.hi, d_hi * M.lo, d_hi * M.hi])
    return IntervalMatrix(products.min(axis=0) + 0.0, products.max(axis=0) + 0.0)


def abs_upper(J: IntervalMatrix) -> np.ndarray:
    """Elementwise bound on ``|A_ij|`` over every real ``A`` inside ``J``."""
    return np.maximum(np.abs(J.lo), np.abs(J.hi))


class NormKind(str, enum.Enum):
    ONE = "1"
    TWO = "2"
    INF = "inf"
    FRO = "fro"

    @classmethod
    def parse(cls, text) -> NormKind:
        if isinstance(text, NormKind):
            return text
        key = str(text).strip().lower()
        aliases = {"1": cls.ONE, "1.0": cls.ONE, "2": cls.TWO, "2.0": cls.TWO,
                   "inf": cls.INF, "infinity": cls.INF, "fro": cls.FRO, "frobenius": cls.FRO}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unsupported norm: {text!r} (expected 1, 2, inf or fro)") from None


class SpectralNorm(NamedTuple):
    value: float
    converged: bool
    iterations: int


def spectral_norm(A, tol: float = SPECTRAL_TOL, max_iter: int = SPECTRAL_MAX_ITER,
                  seed: int = 0) -> SpectralNorm:
    """Largest singular value of ``A`` by power iteration on ``A.T @ A``.

    Stops once the Rayleigh quotient changes by at most ``tol`` relative.
    Without convergence the Frobenius norm, which dominates the spectral
    norm, is returned with ``converged=False``.
    """
    A = np.asarray(A, dtype=float)
    scale = float(np.abs(A).max()) if A.size else 0.0
    if scale == 0.0:
        return SpectralNorm(0.0, True, 0)
    gram = (A / scale).T @ (A / scale)
    v = np.random.default_rng(seed).standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for it in range(1, max_iter + 1):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector fell in the null space of a nonzero A
            v = np.random.default_rng(seed + it).standard_normal(gram.shape[0])
            v /= np.linalg.norm(v)
            continue
        rayleigh = float(v @ w)
        v = w / norm_w
        if abs(rayleigh - estimate) <= tol * abs(rayleigh):
            return SpectralNorm(scale * float(np.sqrt(max(rayleigh, 0.0))), True, it)
        estimate = rayleigh
    return SpectralNorm(float(np.linalg.norm(A)), False, max_iter)


def op_norm(A, p: NormKind | str, seed: int = 0) -> float:
    """Operator norm of a real matrix induced by the vector ``p``-norm.

    ``NormKind.FRO`` returns the Frobenius norm, which is not induced but
    dominates the spectral norm.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("op_norm needs a nonempty 2-D matrix")
    p = NormKind.parse(p)
    if p is NormKind.ONE:
        return float(np.abs(A).sum(axis=0).max())
    if p is NormKind.INF:
        return float(np.abs(A).sum(axis=1).max())
    if p is NormKind.FRO:
        return float(np.sqrt(np.square(A).sum()))
    result = spectral_norm(A, seed=seed)
    if not result.converged:
        warnings.warn(
            f"power iteration did not converge in {result.iterations} steps; "
            "using the Frobenius norm as an upper bound",
            SpectralNormWarning,
            stacklevel=2,
        )
    return result.value
