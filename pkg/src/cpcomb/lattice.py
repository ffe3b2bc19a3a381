"""Lattice bases, boxes and point enumeration.

All arithmetic is double precision.  A basis is stored column-wise: the
lattice is ``{B @ z : z integer}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityExceeded, SingularBasis

DEFAULT_CANDIDATE_CAP = 10**8
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class LatticeBasis:
    """Invertible square matrix whose columns generate a lattice."""

    matrix: np.ndarray
    inverse: np.ndarray = field(repr=False)
    det_abs: float

    @property
    def dim_total(self) -> int:
        return self.matrix.shape[0]

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.matrix[:, j].copy() for j in range(self.dim_total)]

    def point(self, z) -> np.ndarray:
        return self.matrix @ np.asarray(z, dtype=float)

    def coords(self, v) -> np.ndarray:
        """Real coordinates of ``v`` with respect to the basis."""
        return self.inverse @ np.asarray(v, dtype=float)


def make_basis(columns: Sequence[Sequence[float]]) -> LatticeBasis:
    """Build a basis from a list of column vectors.

    Raises
    ------
    SingularBasis
        If ``|det| < 1e-10 * prod(column norms)``.
    """
    mat = np.array(columns, dtype=float).T
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise SingularBasis(f"basis must be a non-empty square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise SingularBasis("basis contains non-finite entries")
    det = float(np.linalg.det(mat))
    scale = float(np.prod(np.linalg.norm(mat, axis=0)))
    if scale == 0.0 or abs(det) < 1e-10 * scale:
        raise SingularBasis(f"near-singular basis (|det|={abs(det):.3e}, column norm product={scale:.3e})")
    return LatticeBasis(matrix=mat, inverse=np.linalg.inv(mat), det_abs=abs(det))


def basis_from_matrix(mat) -> LatticeBasis:
    """Same as :func:`make_basis` but takes the matrix with basis vectors as columns."""
    return make_basis(np.asarray(mat, dtype=float).T)


def dual_basis(basis: LatticeBasis) -> LatticeBasis:
    """Dual basis ``D = B^{-T}``, so that ``D.T @ B`` is the identity."""
    return basis_from_matrix(basis.inverse.T)


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed box ``prod [lo_i, hi_i]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be 1-d arrays of equal length")
        if np.any(hi < lo):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, intervals: Sequence[Sequence[float]]) -> "Box":
        arr = np.asarray(intervals, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def shifted(self, t) -> "Box":
        t = np.asarray(t, dtype=float)
        return Box(self.lo + t, self.hi + t)

    def contains(self, points, tol: float = BOUNDARY_TOL) -> np.ndarray:
        """Closed-box membership for an ``(N, dim)`` array."""
        pts = np.atleast_2d(points)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lo, self.hi))), dtype=float)

    def intervals(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.lo, self.hi)]


def product_box(a: Box, b: Box) -> Box:
    return Box(np.concatenate([a.lo, b.lo]), np.concatenate([a.hi, b.hi]))


@dataclass(frozen=True)
class LatticePoint:
    int_coords: np.ndarray
    point: np.ndarray


@dataclass(frozen=True)
class LatticePointSet:
    """Result of an enumeration, stored as parallel arrays."""

    int_coords: np.ndarray  # (N, n) int64
    points: np.ndarray  # (N, n) float

    def __len__(self) -> int:
        return self.int_coords.shape[0]

    def __iter__(self) -> Iterator[LatticePoint]:
        for z, p in zip(self.int_coords, self.points):
            yield LatticePoint(z, p)


def _integer_ranges(basis: LatticeBasis, region: Box) -> tuple[np.ndarray, np.ndarray]:
    images = region.corners() @ basis.inverse.T
    lo = np.ceil(images.min(axis=0) - 1e-9).astype(np.int64)
    hi = np.floor(images.max(axis=0) + 1e-9).astype(np.int64)
    return lo, hi


def enumerate_in_box(basis: LatticeBasis, region: Box, cap: int = DEFAULT_CANDIDATE_CAP) -> LatticePointSet:
    """All lattice points ``B @ z`` inside the closed ``region``.

    The integer bounding box of ``B^{-1}(region)`` is scanned over every
    coordinate but one; the remaining coordinate is solved for as an exact
    interval from the box inequalities, then every candidate is filtered
    by closed-box membership with tolerance ``BOUNDARY_TOL``.
    """
    n = basis.dim_total
    if region.dim != n:
        raise ValueError(f"region has dim {region.dim}, basis has {n}")
    zlo, zhi = _integer_ranges(basis, region)
    widths = zhi - zlo + 1
    if np.any(widths <= 0):
        return LatticePointSet(np.zeros((0, n), np.int64), np.zeros((0, n)))

    solve = int(np.argmax(widths))
    rest = [i for i in range(n) if i != solve]
    n_prefix = int(np.prod(widths[rest].astype(float))) if rest else 1
    if n_prefix > cap:
        raise CapacityExceeded(f"{n_prefix} prefix candidates exceed cap {cap}")

    if rest:
        grids = np.meshgrid(*[np.arange(zlo[i], zhi[i] + 1) for i in rest], indexing="ij")
        prefix = np.stack([g.ravel() for g in grids], axis=1)
    else:
        prefix = np.zeros((1, 0), np.int64)

    B = basis.matrix
    partial = prefix @ B[:, rest].T if rest else np.zeros((1, n))
    col = B[:, solve]
    lower = np.full(prefix.shape[0], float(zlo[solve]))
    upper = np.full(prefix.shape[0], float(zhi[solve]))
    tol = BOUNDARY_TOL * max(1.0, float(np.max(np.abs(np.concatenate([region.lo, region.hi])))))
    feasible = np.ones(prefix.shape[0], dtype=bool)
    for r in range(n):
        a = col[r]
        lo_r = region.lo[r] - tol - partial[:, r]
        hi_r = region.hi[r] + tol - partial[:, r]
        if abs(a) < 1e-300:
            feasible &= (lo_r <= 0) & (hi_r >= 0)
            continue
        t1, t2 = lo_r / a, hi_r / a
        lower = np.maximum(lower, np.minimum(t1, t2))
        upper = np.minimum(upper, np.maximum(t1, t2))
    kmin = np.ceil(lower - 1e-9).astype(np.int64)
    kmax = np.floor(upper + 1e-9).astype(np.int64)
    counts = np.where(feasible, np.maximum(kmax - kmin + 1, 0), 0)
    total = int(counts.sum())
    if total > cap:
        raise CapacityExceeded(f"{total} candidates exceed cap {cap}")

    idx = np.repeat(np.arange(prefix.shape[0]), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    z = np.empty((total, n), dtype=np.int64)
    if rest:
        z[:, rest] = prefix[idx]
    z[:, solve] = kmin[idx] + offsets
    pts = z @ B.T
    keep = region.contains(pts, BOUNDARY_TOL)
    return LatticePointSet(z[keep], pts[keep])


SNAP_TOL = 1e-12


def reduce_to_fundamental(basis: LatticeBasis, v) -> tuple[np.ndarray, np.ndarray]:
    """Reduce ``v`` modulo the lattice.

    Returns the fractional basis coordinates in ``[0, 1)`` and the
    representative ``B @ fractional`` in the fundamental parallelotope.
    """
    c = basis.coords(v)
    # snap coordinates within rounding noise of an integer so reduction is idempotent
    near = np.round(c)
    c = np.where(np.abs(c - near) < SNAP_TOL * np.maximum(1.0, np.abs(c)), near, c)
    frac = c - np.floor(c)
    frac[frac >= 1.0] = 0.0
    return frac, basis.matrix @ frac
