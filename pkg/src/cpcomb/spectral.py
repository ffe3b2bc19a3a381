"""Averaged quantities: density, autocorrelation, diffraction, almost periods.

Each closed formula has a brute-force counterpart that only looks at a
finite comb:

=====================  ==========================
closed form            estimator
=====================  ==========================
density_closed         weyl_average
autocorr_closed        autocorr_estimate
diffraction_peaks      fourier_bohr_estimate
=====================  ==========================

Phase convention: a dual vector ``(k, eta)`` acts on ``(s, h)`` through
``exp(2 pi i (k.s + eta.h))`` and the Fourier-Bohr estimator pairs atoms
with the conjugate character ``exp(-2 pi i k.x)``.  With that choice the
decoration factor is ``rho(k, eta) = sum_j w_j exp(-2 pi i (k.s_j + eta.k_j))``
and the closed coefficient equals the estimator limit at the origin of
the torus, phase included.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .comb import MERGE_TOL, Decoration, WeightedComb, _merge_atoms, hull_element
from .errors import NoCandidatesInRange
from .lattice import Box, dual_basis, enumerate_in_box
from .scheme import SchemeSpec, TorusPoint, torus_point
from .weights import (
    Gaussian,
    PeriodResult,
    Product,
    WeightFunction,
    admissibility_certificate,
    fourier_many,
    has_nontrivial_period,
    integral,
    require_smooth,
    self_correlation_many,
)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Box sequences and densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxSequence:
    """Nested boxes sharing the lower corner of ``base``; sides grow by ``growth``."""

    base: Box
    growth: float = 10.0
    steps: int = 3

    def __post_init__(self):
        if self.growth <= 1.0 or self.steps < 1:
            raise ValueError("growth must exceed 1 and steps must be >= 1")
        if self.base.volume <= 0:
            raise ValueError("base box must have positive volume")

    def boxes(self) -> list[Box]:
        lo, side = self.base.lo, self.base.hi - self.base.lo
        return [Box(lo, lo + side * self.growth**i) for i in range(self.steps)]

    @property
    def largest(self) -> Box:
        return self.boxes()[-1]


def density_closed(scheme: SchemeSpec, f: WeightFunction, decoration: Decoration) -> complex:
    """Weyl limit ``(sum_j w_j / covolume) * int f``."""
    if not f.non_smooth:
        admissibility_certificate(f, scheme.det_abs)
    return decoration.total_weight / scheme.det_abs * integral(f)


def weyl_average(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, xi: TorusPoint,
    boxes: BoxSequence, eps_trunc: float = 1e-12,
) -> list[complex]:
    """Mean weight per unit volume of the hull element ``xi`` over each box."""
    comb = hull_element(scheme, f, decoration, xi, boxes.largest, eps_trunc, allow_nonsmooth=True)
    return [complex(comb.weights[b.contains(comb.positions)].sum()) / b.volume for b in boxes.boxes()]


# ---------------------------------------------------------------------------
# Autocorrelation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AutocorrelationTable:
    displacements: np.ndarray  # (N, d)
    coords: np.ndarray  # (N, d+m) lattice coordinates of the lattice part
    eta: np.ndarray  # (N,) complex coefficients, already divided by the covolume
    pairs: np.ndarray = field(default=None)  # (N, 2) decoration pair indices
    normalization: float = 1.0

    def __len__(self) -> int:
        return self.eta.size

    def top(self, n: int) -> "AutocorrelationTable":
        order = np.lexsort((self.displacements[:, 0], -np.abs(self.eta)))[:n]
        return self.subset(order)

    def subset(self, idx) -> "AutocorrelationTable":
        pairs = None if self.pairs is None else self.pairs[idx]
        return AutocorrelationTable(self.displacements[idx], self.coords[idx], self.eta[idx], pairs, self.normalization)

    def lookup(self, displacement, tol: float = 1e-6) -> complex | None:
        dist = np.max(np.abs(self.displacements - np.asarray(displacement, float)), axis=1)
        i = int(np.argmin(dist)) if len(dist) else -1
        return complex(self.eta[i]) if i >= 0 and dist[i] <= tol else None


def autocorr_closed(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, displacement_range: Box,
    internal_cut: float = 6.0,
) -> AutocorrelationTable:
    """Autocorrelation coefficients from the closed form.

    Coefficient at ``s_i - s_j + l`` is
    ``w_i conj(w_j) (f * f~)(k_i - k_j + l*) / covolume``, summed over
    coinciding displacements.
    """
    require_smooth(f, "autocorr_closed")
    admissibility_certificate(f, scheme.det_abs)
    d, m = scheme.d, scheme.m
    disp, coords, eta, pairs = [], [], [], []
    for i in range(len(decoration)):
        for j in range(len(decoration)):
            wij = decoration.w[i] * np.conj(decoration.w[j])
            if wij == 0:
                continue
            ds = decoration.s[i] - decoration.s[j]
            dk = decoration.k[i] - decoration.k[j]
            region = Box(
                np.concatenate([displacement_range.lo - ds, -internal_cut - dk]),
                np.concatenate([displacement_range.hi - ds, internal_cut - dk]),
            )
            found = enumerate_in_box(scheme.basis, region)
            u = found.points[:, d:] + dk
            keep = np.linalg.norm(u, axis=1) <= internal_cut
            if not np.any(keep):
                continue
            disp.append(found.points[keep, :d] + ds)
            coords.append(found.int_coords[keep])
            eta.append(wij * self_correlation_many(f, u[keep]) / scheme.det_abs)
            pairs.append(np.tile([i, j], (int(keep.sum()), 1)))
    if not disp:
        n = d + m
        return AutocorrelationTable(np.zeros((0, d)), np.zeros((0, n), np.int64), np.zeros(0, complex),
                                    np.zeros((0, 2), np.int64), 1.0 / scheme.det_abs)
    disp = np.concatenate(disp)
    coords = np.concatenate(coords)
    eta = np.concatenate(eta)
    pairs = np.concatenate(pairs)
    if len(decoration) > 1:
        disp, eta, coords, pairs = _merge_table(disp, eta, coords, pairs)
    keep = displacement_range.contains(disp)
    order = np.lexsort(disp[keep].T[::-1])
    return AutocorrelationTable(disp[keep][order], coords[keep][order], eta[keep][order], pairs[keep][order],
                                1.0 / scheme.det_abs)


def _merge_table(disp, eta, coords, pairs):
    pos, merged = _merge_atoms(disp, eta, MERGE_TOL)
    if len(pos) == len(disp):
        return disp, eta, coords, pairs
    # recover representative rows for the merged displacements
    tree = cKDTree(disp)
    _, rep = tree.query(pos)
    return pos, merged, coords[rep], pairs[rep]


def autocorr_estimate(
    comb: WeightedComb, displacements, match_tol: float = 1e-6, workers: int = 1
) -> np.ndarray:
    """Pair-sum estimate ``(1/vol) sum_{x - y ~ l} w_x conj(w_y)`` at each displacement."""
    disp = np.asarray(displacements, dtype=float).reshape(-1, comb.d)
    if len(comb) == 0:
        return np.zeros(len(disp), dtype=complex)
    tree = cKDTree(comb.positions)
    vol = comb.physical_box.volume
    w = comb.weights

    def one(l):
        shifted = cKDTree(comb.positions - l)
        pairs = shifted.sparse_distance_matrix(tree, match_tol, output_type="ndarray")
        if len(pairs) == 0:
            return 0j
        return complex(np.sum(w[pairs["i"]] * np.conj(w[pairs["j"]]))) / vol

    return np.array(_map(one, list(disp), workers), dtype=complex)


def autocorr_estimate_table(
    comb: WeightedComb, reference: AutocorrelationTable, match_tol: float = 1e-6, workers: int = 1
) -> AutocorrelationTable:
    """Estimator evaluated on the support of a closed-form table."""
    est = autocorr_estimate(comb, reference.displacements, match_tol, workers)
    return AutocorrelationTable(reference.displacements, reference.coords, est, reference.pairs,
                                1.0 / comb.physical_box.volume)


# ---------------------------------------------------------------------------
# Diffraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeakList:
    k: np.ndarray  # (N, d)
    z: np.ndarray  # (N, d+m)
    eta: np.ndarray  # (N, m)
    c: np.ndarray  # (N,) complex
    threshold: float

    def __len__(self) -> int:
        return self.c.size

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.c) ** 2

    def top(self, n: int) -> "PeakList":
        return PeakList(self.k[:n], self.z[:n], self.eta[:n], self.c[:n], self.threshold)


def rho_torus(decoration: Decoration, k, eta) -> np.ndarray:
    """``sum_j w_j exp(-2 pi i (k.s_j + eta.k_j))`` for rows of ``k`` and ``eta``."""
    k = np.atleast_2d(k)
    eta = np.atleast_2d(eta)
    phase = k @ decoration.s.T + eta @ decoration.k.T
    return np.exp(-2j * math.pi * phase) @ decoration.w


def _gaussian_widths(f: WeightFunction):
    if isinstance(f, Gaussian):
        return [(f.width, f.m, abs(f.amplitude))]
    if isinstance(f, Product) and all(isinstance(g, Gaussian) for g in f.factors):
        out = [(g.width, g.m, abs(g.amplitude)) for g in f.factors]
        a, m, amp = out[0]
        out[0] = (a, m, amp * abs(f.amplitude))
        return out
    return None


def internal_cut_for(f: WeightFunction, decoration: Decoration, det_abs: float, intensity_floor: float) -> float:
    """Internal radius beyond which every peak falls below ``intensity_floor``.

    Uses ``|c| <= sum|w_j| / covolume * |F(eta)|`` and the Gaussian bound on
    ``|F|``; other weights need an explicit cut.
    """
    parts = _gaussian_widths(f)
    if parts is None:
        raise ValueError(f"no Fourier decay bound for {f.kind}; pass internal_cut explicitly")
    a_min = min(a for a, _, _ in parts)
    peak = float(np.sum(np.abs(decoration.w))) / det_abs
    for a, m, amp in parts:
        peak *= amp * a**m
    if peak == 0:
        return 0.0
    ratio = peak**2 / intensity_floor
    if ratio <= 1:
        return 0.0
    return math.sqrt(math.log(ratio) / (2 * math.pi * a_min**2))


def diffraction_peaks(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, k_range: Box,
    internal_cut: float | None = None, intensity_floor: float = 1e-8,
) -> PeakList:
    """Bragg peaks ``c = rho(k, eta) F(eta) / covolume`` with ``|c|^2 >= intensity_floor``."""
    require_smooth(f, "diffraction_peaks")
    admissibility_certificate(f, scheme.det_abs)
    d, m = scheme.d, scheme.m
    if internal_cut is None:
        internal_cut = internal_cut_for(f, decoration, scheme.det_abs, intensity_floor)
    dual = dual_basis(scheme.basis)
    region = Box(np.concatenate([k_range.lo, np.full(m, -internal_cut)]),
                 np.concatenate([k_range.hi, np.full(m, internal_cut)]))
    found = enumerate_in_box(dual, region)
    eta = found.points[:, d:]
    keep = np.linalg.norm(eta, axis=1) <= internal_cut
    k = found.points[keep, :d]
    eta = eta[keep]
    z = found.int_coords[keep]
    c = rho_torus(decoration, k, eta) * fourier_many(f, eta) / scheme.det_abs if len(k) else np.zeros(0, complex)
    inten = np.abs(c) ** 2
    keep = inten >= intensity_floor
    k, eta, z, c, inten = k[keep], eta[keep], z[keep], c[keep], inten[keep]
    order = np.lexsort(tuple(k.T[::-1]) + (-inten,))
    return PeakList(k[order], z[order], eta[order], c[order], intensity_floor)


def fourier_bohr_estimate(comb: WeightedComb, k, boxes: BoxSequence) -> list[complex]:
    """``(1/vol B_n) sum_{x in B_n} w_x exp(-2 pi i k.x)`` for each box."""
    k = np.asarray(k, dtype=float).reshape(comb.d)
    terms = comb.weights * np.exp(-2j * math.pi * (comb.positions @ k))
    return [complex(terms[b.contains(comb.positions)].sum()) / b.volume for b in boxes.boxes()]


def fourier_bohr_many(comb: WeightedComb, ks, box: Box, workers: int = 1) -> np.ndarray:
    """Final-box Fourier-Bohr coefficients for many frequencies."""
    inside = box.contains(comb.positions)
    pos = comb.positions[inside]
    w = comb.weights[inside]
    vol = box.volume

    def one(k):
        return complex(np.sum(w * np.exp(-2j * math.pi * (pos @ k)))) / vol

    return np.array(_map(one, list(np.asarray(ks, float).reshape(-1, comb.d)), workers), dtype=complex)


# ---------------------------------------------------------------------------
# Almost periods
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlmostPeriods:
    periods: np.ndarray  # (N, d)
    coords: np.ndarray  # (N, d+m)
    verified_sup: np.ndarray  # (N,)
    delta: float
    max_gap: float
    candidates: int

    def __len__(self) -> int:
        return self.verified_sup.size


def _kernel_profile(scale: float, d: int):
    """Radial bump of support radius ``scale`` with unit integral on R^d."""
    from .weights import Bump, integral

    raw = Bump(m=d, radius=scale)
    norm = integral(raw).real
    return lambda r: np.where(r < scale, np.exp(1.0 - 1.0 / (1.0 - np.minimum(r / scale, 1 - 1e-15) ** 2)), 0.0) / norm


def smoothed(comb: WeightedComb, grid: np.ndarray, scale: float) -> np.ndarray:
    """``(comb * phi)(x)`` on the rows of ``grid``."""
    phi = _kernel_profile(scale, comb.d)
    if len(comb) == 0:
        return np.zeros(len(grid), dtype=complex)
    pairs = cKDTree(grid).sparse_distance_matrix(cKDTree(comb.positions), scale, output_type="ndarray")
    vals = comb.weights[pairs["j"]] * phi(pairs["v"])
    out = np.bincount(pairs["i"], weights=vals.real, minlength=len(grid)) + 1j * np.bincount(
        pairs["i"], weights=vals.imag, minlength=len(grid)
    )
    return out


def _grid(window: Box, step: float) -> np.ndarray:
    axes = [np.arange(a, b + step / 2, step) for a, b in zip(window.lo, window.hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, window.dim)


def almost_periods(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, eps: float,
    test_kernel_scale: float, search_box: Box, verify_window: Box | None = None,
    eps_trunc: float = 1e-12, grid_step: float | None = None,
) -> AlmostPeriods:
    """Verified ``eps``-almost periods of the smoothed comb inside ``search_box``.

    Candidates are physical parts ``t`` of lattice points with
    ``|t*| <= delta``.  ``delta`` is the largest internal shift ``u`` whose
    smoothed difference ``((mu[0, u] - nu) * phi)`` stays below ``eps/2``
    on the verification grid.  Every candidate is then checked directly on
    the smoothed comb.
    """
    require_smooth(f, "almost_periods")
    if eps <= 0:
        raise ValueError("eps must be positive")
    d, m = scheme.d, scheme.m
    if verify_window is None:
        verify_window = Box(np.zeros(d), np.full(d, 200.0))
    step = grid_step or test_kernel_scale / 16
    grid = _grid(verify_window, step)
    margin = test_kernel_scale + 1.0
    base_box = Box(verify_window.lo - margin, verify_window.hi + margin)
    origin = torus_point(scheme, np.zeros(d), np.zeros(m))
    nu = hull_element(scheme, f, decoration, origin, base_box, eps_trunc)
    base = smoothed(nu, grid, test_kernel_scale)

    def shift_error(u: np.ndarray) -> float:
        mu = hull_element(scheme, f, decoration, torus_point(scheme, np.zeros(d), u), base_box, eps_trunc)
        return float(np.max(np.abs(smoothed(mu, grid, test_kernel_scale) - base)))

    directions = np.vstack([np.eye(m), -np.eye(m)])
    delta = 0.0
    hi = 1.0
    lo = 0.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if max(shift_error(mid * u) for u in directions) <= eps / 2:
            lo = mid
        else:
            hi = mid
    delta = lo

    region = Box(np.concatenate([search_box.lo, np.full(m, -delta)]),
                 np.concatenate([search_box.hi, np.full(m, delta)]))
    found = enumerate_in_box(scheme.basis, region)
    keep = np.linalg.norm(found.points[:, d:], axis=1) <= delta
    cands = found.points[keep, :d]
    coords = found.int_coords[keep]
    if len(cands) == 0:
        raise NoCandidatesInRange(f"no lattice point in the search box has |t*| <= {delta:.3g}")

    hi_box = Box(base_box.lo - np.max(np.abs(cands), axis=0), base_box.hi + np.max(np.abs(cands), axis=0))
    wide = hull_element(scheme, f, decoration, origin, hi_box, eps_trunc)
    ref = smoothed(wide, grid, test_kernel_scale)
    sups = np.array([float(np.max(np.abs(smoothed(wide, grid - t, test_kernel_scale) - ref))) for t in cands])
    ok = sups <= eps
    periods, coords, sups = cands[ok], coords[ok], sups[ok]
    order = np.lexsort(periods.T[::-1])
    periods, coords, sups = periods[order], coords[order], sups[order]
    return AlmostPeriods(periods, coords, sups, delta, _max_gap(periods, search_box), int(len(cands)))


def _max_gap(periods: np.ndarray, search_box: Box) -> float:
    if len(periods) < 2:
        return math.inf
    if periods.shape[1] == 1:
        return float(np.max(np.diff(np.sort(periods[:, 0]))))
    probe = _grid(search_box, float(np.min(search_box.hi - search_box.lo)) / 50)
    dist, _ = cKDTree(periods).query(probe)
    return float(2 * dist.max())


# ---------------------------------------------------------------------------
# Injectivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InjectivityReport:
    min_rho: float
    argmin_z: np.ndarray
    period: PeriodResult
    verdict: bool
    dual_search_radius: int

    def to_dict(self) -> dict:
        return {
            "min_abs_rho": self.min_rho,
            "argmin_z": [int(v) for v in self.argmin_z],
            "has_nontrivial_period": self.period.has_period,
            "period_witness": None if self.period.witness is None else self.period.witness.tolist(),
            "degenerate_weight": self.period.degenerate,
            "dual_search_radius": self.dual_search_radius,
            "verdict": "injectivity hypotheses verified on searched range" if self.verdict
            else "injectivity hypotheses NOT verified",
        }


def injectivity_report(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, dual_search_radius: int = 5,
    period_search_box=None, period_tol: float = 1e-9,
) -> InjectivityReport:
    n = scheme.d + scheme.m
    dual = dual_basis(scheme.basis)
    rng = np.arange(-dual_search_radius, dual_search_radius + 1)
    z = np.stack(np.meshgrid(*([rng] * n), indexing="ij"), -1).reshape(-1, n)
    pts = z @ dual.matrix.T
    rho = np.abs(rho_torus(decoration, pts[:, : scheme.d], pts[:, scheme.d :]))
    i = int(np.argmin(rho))
    if np.all(decoration.w == 0):
        period = PeriodResult(True, None, True)
    else:
        period = has_nontrivial_period(f, period_search_box, period_tol)
    verdict = bool(rho[i] > 1e-9 and not period.has_period)
    return InjectivityReport(float(rho[i]), z[i], period, verdict, int(dual_search_radius))
