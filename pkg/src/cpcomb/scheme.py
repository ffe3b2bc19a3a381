"""Cut-and-project schemes on R^d x R^m: star map, torus points, validation."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InjectivityFailed
from .lattice import Box, LatticeBasis, enumerate_in_box, reduce_to_fundamental

log = logging.getLogger(__name__)

INJECTIVITY_TOL = 1e-9


@dataclass(frozen=True)
class ValidationCertificate:
    injectivity_ok: bool
    search_radius: int
    denseness_ok: bool
    coverage_eps: float
    coverage_fraction: float
    denseness_overridden: bool = False

    def to_dict(self) -> dict:
        return {
            "injectivity_ok": self.injectivity_ok,
            "search_radius": self.search_radius,
            "denseness_ok": self.denseness_ok,
            "coverage_eps": self.coverage_eps,
            "coverage_fraction": self.coverage_fraction,
            "denseness_overridden": self.denseness_overridden,
        }


@dataclass(frozen=True)
class SchemeSpec:
    d: int
    m: int
    basis: LatticeBasis
    validation: ValidationCertificate | None = None

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be positive")
        if self.d + self.m != self.basis.dim_total:
            raise ValueError(f"d + m = {self.d + self.m} but basis has dimension {self.basis.dim_total}")

    @property
    def det_abs(self) -> float:
        return self.basis.det_abs

    def split(self, v) -> tuple[np.ndarray, np.ndarray]:
        v = np.asarray(v, dtype=float)
        return v[..., : self.d], v[..., self.d :]


@dataclass(frozen=True)
class TorusPoint:
    """A point ``[s, k]`` of the torus, stored in basis-fractional coordinates."""

    fractional: np.ndarray
    lift: np.ndarray

    def s(self, d: int) -> np.ndarray:
        return self.lift[:d]

    def k(self, d: int) -> np.ndarray:
        return self.lift[d:]


def star_map(scheme: SchemeSpec, z) -> tuple[np.ndarray, np.ndarray]:
    """Physical and internal parts ``(l, l*)`` of the lattice point ``B @ z``."""
    return scheme.split(scheme.basis.point(z))


def find_injectivity_witness(d: int, m: int, basis: LatticeBasis, radius: int) -> np.ndarray | None:
    """Smallest nonzero ``z`` with ``|z|_inf <= radius`` and vanishing physical part.

    Loops over the ``m`` free coordinates and solves the ``d x d`` system
    for the remaining ones, so the search is exhaustive on the cube.
    """
    n = d + m
    phys = basis.matrix[:d, :]
    best = None
    if np.linalg.matrix_rank(phys) < d:
        raise InjectivityFailed("physical projection of the lattice is degenerate")
    # pick the best-conditioned d columns to solve for
    solve_cols = max(
        itertools.combinations(range(n), d),
        key=lambda cols: abs(np.linalg.det(phys[:, cols])),
    )
    free_cols = [c for c in range(n) if c not in solve_cols]
    A = phys[:, solve_cols]
    A_inv = np.linalg.inv(A)
    rng = np.arange(-radius, radius + 1)
    chunk = max(1, 200000 // len(rng) ** (m - 1))
    for start in range(0, len(rng), chunk):
        first = rng[start : start + chunk]
        grids = np.meshgrid(first, *([rng] * (m - 1)), indexing="ij")
        free = np.stack([g.ravel() for g in grids], axis=1)
        solved = -(free @ phys[:, free_cols].T) @ A_inv.T
        rounded = np.rint(solved).astype(np.int64)
        z = np.empty((free.shape[0], n), dtype=np.int64)
        z[:, free_cols] = free
        z[:, list(solve_cols)] = rounded
        ok = np.all(np.abs(rounded) <= radius, axis=1) & np.any(z != 0, axis=1)
        if not np.any(ok):
            continue
        z = z[ok]
        norms = np.linalg.norm(z @ phys.T, axis=1)
        hits = z[norms < INJECTIVITY_TOL]
        for w in hits:
            nz = np.flatnonzero(w)
            if w[nz[0]] < 0:
                w = -w
            key = (int(np.max(np.abs(w))), tuple(-w))
            if best is None or key < (int(np.max(np.abs(best))), tuple(-best)):
                best = w
    return best


def star_image_coverage(d: int, m: int, basis: LatticeBasis, radius: int, eps: float) -> float:
    """Fraction of ``eps``-cells of ``[0,1)^m`` hit by star images.

    Uses lattice points with physical part in ``[-radius, radius]^d`` and
    internal part in the unit reference cube.
    """
    region = Box(
        np.concatenate([np.full(d, -float(radius)), np.zeros(m)]),
        np.concatenate([np.full(d, float(radius)), np.ones(m)]),
    )
    pts = enumerate_in_box(basis, region).points
    internal = np.mod(pts[:, d:], 1.0)
    cells_per_axis = int(np.ceil(1.0 / eps))
    idx = np.minimum((internal / eps).astype(np.int64), cells_per_axis - 1)
    flat = np.ravel_multi_index(idx.T, (cells_per_axis,) * m) if len(idx) else np.zeros(0, np.int64)
    hit = np.unique(flat).size
    return hit / cells_per_axis**m


def validate_scheme(
    d: int,
    m: int,
    basis: LatticeBasis,
    search_radius: int = 100,
    coverage_eps: float = 0.05,
    allow_nondense: bool = False,
) -> SchemeSpec:
    """Check the two scheme axioms on a finite range and attach certificates.

    Injectivity failure is fatal.  A denseness failure only logs a warning
    and records ``denseness_ok=False``.
    """
    if search_radius < 10:
        raise ValueError("search_radius must be >= 10")
    if coverage_eps <= 0:
        raise ValueError("coverage_eps must be positive")
    if d + m != basis.dim_total:
        raise ValueError(f"d + m = {d + m} but basis has dimension {basis.dim_total}")
    witness = find_injectivity_witness(d, m, basis, search_radius)
    if witness is not None:
        raise InjectivityFailed(
            f"lattice point z={witness.tolist()} has zero physical part", witness=witness
        )
    coverage = star_image_coverage(d, m, basis, search_radius, coverage_eps)
    dense = coverage >= 1.0
    if not dense:
        log.warning("star image covers only %.1f%% of %.3g-cells; lattice may be rational", 100 * coverage, coverage_eps)
    cert = ValidationCertificate(
        injectivity_ok=True,
        search_radius=int(search_radius),
        denseness_ok=dense,
        coverage_eps=float(coverage_eps),
        coverage_fraction=float(coverage),
        denseness_overridden=bool(allow_nondense and not dense),
    )
    return SchemeSpec(d, m, basis, cert)


def torus_point(scheme: SchemeSpec, s, k) -> TorusPoint:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    lift = np.concatenate([s, k])
    frac, _ = reduce_to_fundamental(scheme.basis, lift)
    return TorusPoint(frac, lift)


def torus_add(scheme: SchemeSpec, a: TorusPoint, b: TorusPoint) -> TorusPoint:
    return torus_point(scheme, *scheme.split(a.lift + b.lift))


def torus_distance(a: TorusPoint, b: TorusPoint) -> float:
    """Max-norm distance between fractional coordinates, modulo 1."""
    diff = np.abs(a.fractional - b.fractional)
    return float(np.max(np.minimum(diff, 1.0 - diff)))


def iota(scheme: SchemeSpec, t) -> TorusPoint:
    return torus_point(scheme, t, np.zeros(scheme.m))


def kappa(scheme: SchemeSpec, h) -> TorusPoint:
    return torus_point(scheme, np.zeros(scheme.d), h)
