"""Weight functions on internal space R^m.

Every weight is a callable taking an ``(..., m)`` array and returning a
complex array of shape ``(...)``.  Gaussians carry closed-form Fourier
transforms and self-correlations; everything else goes through tensor
Simpson quadrature.

Fourier convention: ``F(k) = int f(h) exp(+2 pi i k.h) dh``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NonSmoothWeight, NotAdmissible, QuadratureNotConverged

QUAD_TOL = 1e-9
QUAD_TAIL = 1e-13
CERT_RADIUS = 50.0


def _as_points(h, m: int) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if m == 1 and (h.ndim == 0 or h.shape[-1] != 1):
        h = h[..., None]
    if h.shape[-1] != m:
        raise ValueError(f"expected trailing dimension {m}, got shape {h.shape}")
    return h


class WeightFunction:
    """Base class.  Subclasses implement ``_raw`` and the decay metadata."""

    m: int
    amplitude: complex
    center: np.ndarray
    non_smooth = False
    kind = "abstract"

    def __call__(self, h) -> np.ndarray:
        x = _as_points(h, self.m) - self.center
        return self.amplitude * self._raw(x)

    def _raw(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- decay metadata -------------------------------------------------
    @property
    def decay_exponent(self) -> float:
        """Largest ``q`` with ``|x|^q |f(x)|`` bounded (``inf`` for fast decay)."""
        return math.inf

    @property
    def support_radius(self) -> float | None:
        """Radius of a centred ball containing the support, if compact."""
        return None

    def envelope(self, r: float) -> float:
        """Upper bound for ``sup_{|x| >= r} |f(x)|``."""
        shifted = max(0.0, r - float(np.linalg.norm(self.center)))
        return abs(self.amplitude) * self._raw_envelope(shifted)

    def _raw_envelope(self, r: float) -> float:
        raise NotImplementedError

    def integration_box(self, tol: float = QUAD_TAIL, power: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Box outside which the integral of ``|f|^power`` is below ``tol`` (roughly)."""
        half = self._raw_integration_halfwidth(tol / max(abs(self.amplitude), 1e-300) ** power, power)
        return self.center - half, self.center + half

    def _raw_integration_halfwidth(self, tol: float, power: int) -> np.ndarray:
        raise NotImplementedError

    # -- closed forms ----------------------------------------------------
    has_analytic_ft = False

    def analytic_fourier(self, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def analytic_self_correlation(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0

    def describe(self) -> dict:
        return {"kind": self.kind, "m": self.m}


@dataclass(frozen=True, eq=False)
class Gaussian(WeightFunction):
    """``A exp(-pi |h - c|^2 / width^2)``."""

    m: int = 1
    width: float = 1.0
    amplitude: complex = 1.0
    center: np.ndarray = field(default=None)
    kind = "gaussian"
    has_analytic_ft = True

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("gaussian width must be positive")
        _init_center(self)

    def _raw(self, x):
        return np.exp(-math.pi * np.sum(x * x, axis=-1) / self.width**2).astype(complex)

    def _raw_envelope(self, r):
        return math.exp(-math.pi * r * r / self.width**2)

    def _raw_integration_halfwidth(self, tol, power):
        r = self.width * math.sqrt(max(math.log(1.0 / tol), 1.0) / (math.pi * power))
        return np.full(self.m, r)

    def analytic_fourier(self, k):
        k = _as_points(k, self.m)
        a = self.width
        phase = np.exp(2j * math.pi * (k @ self.center))
        return self.amplitude * a**self.m * np.exp(-math.pi * a * a * np.sum(k * k, axis=-1)) * phase

    def analytic_self_correlation(self, u):
        u = _as_points(u, self.m)
        a = self.width
        return (abs(self.amplitude) ** 2 * (a / math.sqrt(2.0)) ** self.m
                * np.exp(-math.pi * np.sum(u * u, axis=-1) / (2 * a * a))).astype(complex)

    def describe(self):
        return {"kind": self.kind, "m": self.m, "width": self.width,
                "amplitude": _cplx(self.amplitude), "center": self.center.tolist()}


@dataclass(frozen=True, eq=False)
class Bump(WeightFunction):
    """``A exp(1 - 1/(1 - |h - c|^2/r^2))`` inside the ball of radius ``r``, zero outside."""

    m: int = 1
    radius: float = 1.0
    amplitude: complex = 1.0
    center: np.ndarray = field(default=None)
    kind = "bump"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")
        _init_center(self)

    def _raw(self, x):
        q = np.sum(x * x, axis=-1) / self.radius**2
        out = np.zeros(q.shape, dtype=complex)
        inside = q < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside]))
        return out

    @property
    def support_radius(self):
        return self.radius + float(np.linalg.norm(self.center))

    def _raw_envelope(self, r):
        if r >= self.radius:
            return 0.0
        q = (r / self.radius) ** 2
        return math.exp(1.0 - 1.0 / (1.0 - q))

    def _raw_integration_halfwidth(self, tol, power):
        return np.full(self.m, self.radius)

    def describe(self):
        return {"kind": self.kind, "m": self.m, "radius": self.radius,
                "amplitude": _cplx(self.amplitude), "center": self.center.tolist()}


@dataclass(frozen=True, eq=False)
class PolyDecay(WeightFunction):
    """``A (1 + |h - c|^2/scale^2)^(-p/2)``; admissible iff ``p > m``."""

    m: int = 1
    exponent: float = 2.0
    scale: float = 1.0
    amplitude: complex = 1.0
    center: np.ndarray = field(default=None)
    kind = "polydecay"

    def __post_init__(self):
        if self.scale <= 0 or self.exponent <= 0:
            raise ValueError("polydecay exponent and scale must be positive")
        _init_center(self)

    def _raw(self, x):
        return ((1.0 + np.sum(x * x, axis=-1) / self.scale**2) ** (-0.5 * self.exponent)).astype(complex)

    @property
    def decay_exponent(self):
        return self.exponent

    def _raw_envelope(self, r):
        return (1.0 + (r / self.scale) ** 2) ** (-0.5 * self.exponent)

    def _raw_integration_halfwidth(self, tol, power):
        excess = power * self.exponent - self.m
        if excess <= 0:
            return np.full(self.m, math.inf)
        # radial tail int_R^inf r^(m-1-power*p) dr ~ R^-excess / excess
        r = self.scale * (1.0 / (tol * excess)) ** (1.0 / excess)
        return np.full(self.m, r)

    def asymptotic_ratio(self, q: float) -> float:
        """Limit of ``|x|^q f(x)/A`` as ``|x| -> inf`` (only meaningful for ``q == p``)."""
        return self.scale**self.exponent if q == self.exponent else (0.0 if q < self.exponent else math.inf)

    def describe(self):
        return {"kind": self.kind, "m": self.m, "exponent": self.exponent, "scale": self.scale,
                "amplitude": _cplx(self.amplitude), "center": self.center.tolist()}


@dataclass(frozen=True, eq=False)
class SharpWindow(WeightFunction):
    """Characteristic function of the box ``[lo, hi]`` (non-smooth)."""

    lo: np.ndarray = None
    hi: np.ndarray = None
    amplitude: complex = 1.0
    kind = "sharp_window"
    non_smooth = True

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("sharp window needs lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "center", np.zeros(lo.size))

    @property
    def m(self):
        return self.lo.size

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def _raw(self, x):
        inside = np.all((x >= self.lo) & (x <= self.hi), axis=-1)
        return inside.astype(complex)

    @property
    def support_radius(self):
        return float(np.linalg.norm(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    def _raw_envelope(self, r):
        return 1.0 if r <= self.support_radius else 0.0

    def integration_box(self, tol=QUAD_TAIL, power=1):
        return self.lo.copy(), self.hi.copy()

    def describe(self):
        return {"kind": self.kind, "m": self.m, "lo": self.lo.tolist(), "hi": self.hi.tolist(),
                "amplitude": _cplx(self.amplitude)}


@dataclass(frozen=True, eq=False)
class Product(WeightFunction):
    """Tensor product ``f_1(h_1) f_2(h_2) ...`` over consecutive coordinate blocks."""

    factors: tuple = ()
    amplitude: complex = 1.0
    kind = "product"

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ValueError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "center", np.zeros(self.m))

    @property
    def m(self):
        return sum(f.m for f in self.factors)

    @property
    def non_smooth(self):
        return any(f.non_smooth for f in self.factors)

    @property
    def has_analytic_ft(self):
        return all(f.has_analytic_ft for f in self.factors)

    def _blocks(self, x):
        start = 0
        for f in self.factors:
            yield f, x[..., start : start + f.m]
            start += f.m

    def _raw(self, x):
        out = np.ones(x.shape[:-1], dtype=complex)
        for f, xb in self._blocks(x):
            out = out * f(xb)
        return out

    @property
    def decay_exponent(self):
        return min(f.decay_exponent for f in self.factors)

    @property
    def support_radius(self):
        radii = [f.support_radius for f in self.factors]
        if any(r is None for r in radii):
            return None
        return float(np.linalg.norm(radii))

    def _raw_envelope(self, r):
        # some block has norm >= r / sqrt(#blocks)
        n = len(self.factors)
        sups = [f.envelope(0.0) for f in self.factors]
        best = 0.0
        for i, f in enumerate(self.factors):
            others = float(np.prod([s for j, s in enumerate(sups) if j != i]))
            best = max(best, f.envelope(r / math.sqrt(n)) * others)
        return best

    def integration_box(self, tol=QUAD_TAIL, power=1):
        los, his = [], []
        for f in self.factors:
            lo, hi = f.integration_box(tol, power)
            los.append(lo)
            his.append(hi)
        return np.concatenate(los), np.concatenate(his)

    def analytic_fourier(self, k):
        k = _as_points(k, self.m)
        out = self.amplitude * np.ones(k.shape[:-1], dtype=complex)
        for f, kb in self._blocks(k):
            out = out * f.analytic_fourier(kb)
        return out

    def analytic_self_correlation(self, u):
        u = _as_points(u, self.m)
        out = abs(self.amplitude) ** 2 * np.ones(u.shape[:-1], dtype=complex)
        for f, ub in self._blocks(u):
            out = out * f.analytic_self_correlation(ub)
        return out

    @property
    def is_zero(self):
        return self.amplitude == 0 or any(f.is_zero for f in self.factors)

    def describe(self):
        return {"kind": self.kind, "m": self.m, "amplitude": _cplx(self.amplitude),
                "factors": [f.describe() for f in self.factors]}


def _init_center(obj):
    c = np.zeros(obj.m) if obj.center is None else np.atleast_1d(np.asarray(obj.center, dtype=float))
    if c.shape != (obj.m,):
        raise ValueError(f"center must have length {obj.m}")
    object.__setattr__(obj, "center", c)


def _cplx(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def require_smooth(f: WeightFunction, what: str) -> None:
    if f.non_smooth:
        raise NonSmoothWeight(f"{what} requires a continuous weight; got {f.kind}")


# ---------------------------------------------------------------------------
# Evaluation and admissibility
# ---------------------------------------------------------------------------

def eval_weight(f: WeightFunction, h) -> complex | np.ndarray:
    out = f(h)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DecayCertificate:
    """Claim ``|x|^(m+alpha) |f(x)| <= C`` with the derived tail constant."""

    C: float
    alpha: float
    tail_constant: float
    sampled_max: float

    def tail_sum(self, l: int) -> float:
        """Certified bound ``tail_constant * sum_{k>=l} k^-(1+alpha)``."""
        from scipy.special import zeta

        return self.tail_constant * float(zeta(1.0 + self.alpha, max(l, 1)))

    def to_dict(self) -> dict:
        return {"C": self.C, "alpha": self.alpha, "tail_constant": self.tail_constant,
                "sampled_max": self.sampled_max}


def _certificate_samples(m: int, radius: float = CERT_RADIUS, n_radii: int = 4001) -> np.ndarray:
    radii = np.linspace(0.0, radius, n_radii)
    if m == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        eye = np.eye(m)
        diag = np.array(np.meshgrid(*([[-1.0, 1.0]] * m), indexing="ij")).reshape(m, -1).T / math.sqrt(m)
        rng = np.random.default_rng(12345)
        rand = rng.normal(size=(32, m))
        rand /= np.linalg.norm(rand, axis=1, keepdims=True)
        dirs = np.vstack([eye, -eye, diag, rand])
    return radii[None, :, None] * dirs[:, None, :]


def _refined_max(f: WeightFunction, pts: np.ndarray, g: np.ndarray, q: float) -> float:
    """Grid maximum of ``|x|^q |f(x)|`` polished by a dense local scan along its ray."""
    i, j = np.unravel_index(int(np.argmax(g)), g.shape)
    best = float(g[i, j])
    ray = pts[i, -1] / np.linalg.norm(pts[i, -1])
    step = CERT_RADIUS / (g.shape[1] - 1)
    r0 = np.linalg.norm(pts[i, j])
    r = np.linspace(max(r0 - 2 * step, 0.0), r0 + 2 * step, 4001)
    local = r**q * np.abs(f(r[:, None] * ray))
    return max(best, float(local.max()))


def admissibility_certificate(
    f: WeightFunction, det_abs: float = 1.0, alpha: float | None = None, C: float | None = None
) -> DecayCertificate:
    """Validate the decay hypothesis ``|x|^(m+alpha)|f(x)| <= C`` by sampling.

    ``alpha`` defaults to ``min(1, q - m)`` where ``q`` is the known decay
    exponent of ``f``; ``C`` defaults to the sampled maximum (or the
    analytic supremum when it is attained only at infinity).
    """
    require_smooth(f, "admissibility_certificate")
    m = f.m
    q = f.decay_exponent
    if alpha is None:
        if q <= m:
            raise NotAdmissible(f"{f.kind} decays like |x|^-{q}, needs an exponent > m={m}")
        alpha = min(1.0, q - m)
    if alpha <= 0:
        raise NotAdmissible("alpha must be positive")
    pts = _certificate_samples(m)
    radii = np.linalg.norm(pts, axis=-1)
    g = radii ** (m + alpha) * np.abs(f(pts))
    sampled = _refined_max(f, pts, g, m + alpha)
    inner = g[:, radii[0] <= CERT_RADIUS / 2].max()
    outer = g[:, radii[0] > CERT_RADIUS / 2].max()
    if outer > 1.01 * inner and outer > 0:
        raise NotAdmissible(
            f"|x|^(m+alpha)|f| still growing at radius {CERT_RADIUS} (alpha={alpha}): "
            f"{outer:.4g} vs {inner:.4g}"
        )
    if alpha > q - m:
        raise NotAdmissible(f"alpha={alpha} exceeds the decay excess {q - m}")
    bound = sampled
    if isinstance(f, PolyDecay) and alpha == q - m:
        bound = max(bound, abs(f.amplitude) * f.asymptotic_ratio(q))
    if C is None:
        C = bound
    elif sampled > 1.01 * C:
        raise NotAdmissible(f"claimed C={C} but sampled max is {sampled:.6g}")
    tail_constant = C * 2.0 ** (2 * m + 1) / det_abs
    return DecayCertificate(C=float(C), alpha=float(alpha), tail_constant=float(tail_constant), sampled_max=sampled)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def simpson_integrate(func, lo, hi, tol: float = QUAD_TOL, n0: int = 64, max_points: int = 2**22) -> complex:
    """Tensor composite Simpson with per-axis doubling until two levels agree.

    ``func`` maps an ``(N, m)`` array of nodes to ``N`` values.  The
    returned value carries one Richardson correction.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    m = lo.size
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise QuadratureNotConverged("integration domain is unbounded")

    def level(n):
        axes = [np.linspace(a, b, n + 1) for a, b in zip(lo, hi)]
        weights = [_simpson_weights(n, (b - a) / n) for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
        vals = np.asarray(func(grid)).reshape((n + 1,) * m)
        for w in weights:
            vals = np.tensordot(w, vals, axes=([0], [0]))
        return complex(vals)

    n = n0
    prev = level(n)
    while True:
        n *= 2
        if (n + 1) ** m > max_points:
            raise QuadratureNotConverged(f"no convergence to {tol} before {max_points} nodes")
        cur = level(n)
        if abs(cur - prev) < tol:
            return cur + (cur - prev) / 15.0
        prev = cur


def _quadrature_box(f: WeightFunction, power: int = 1) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = f.integration_box(QUAD_TAIL, power)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))) or np.max(hi - lo) > 1e4:
        raise QuadratureNotConverged(f"{f.kind} decays too slowly for a bounded quadrature domain")
    return lo, hi


def _fourier_polydecay_1d(f: PolyDecay, k: float) -> complex:
    # even profile: F(k) = A e^{2 pi i k c} * 2 int_0^inf g(x) cos(2 pi k x) dx
    from scipy.integrate import quad

    def g(x):
        return (1.0 + (x / f.scale) ** 2) ** (-0.5 * f.exponent)

    if k == 0:
        val, err = quad(g, 0, np.inf, epsabs=QUAD_TOL / 10, epsrel=1e-12, limit=500)
    else:
        val, err = quad(g, 0, np.inf, weight="cos", wvar=2 * math.pi * abs(k), epsabs=QUAD_TOL / 10, limlst=200)
    if not np.isfinite(val) or err > QUAD_TOL:
        raise QuadratureNotConverged(f"polydecay Fourier integral error estimate {err:.2e}")
    return f.amplitude * np.exp(2j * math.pi * k * f.center[0]) * 2.0 * val


def fourier_quadrature(f: WeightFunction, k) -> complex:
    k = np.asarray(k, dtype=float).reshape(f.m)
    if isinstance(f, PolyDecay) and f.m == 1:
        return complex(_fourier_polydecay_1d(f, float(k[0])))
    lo, hi = _quadrature_box(f)
    return simpson_integrate(lambda h: f(h) * np.exp(2j * math.pi * (h @ k)), lo, hi)


def fourier(f: WeightFunction, k, analytic: bool = True) -> complex:
    """``F(k) = int f(h) exp(+2 pi i k.h) dh``."""
    if analytic and f.has_analytic_ft:
        return complex(f.analytic_fourier(np.asarray(k, dtype=float).reshape(f.m)))
    if f.non_smooth and isinstance(f, SharpWindow):
        kk = np.asarray(k, dtype=float).reshape(f.m)
        out = complex(f.amplitude)
        for a, b, kv in zip(f.lo, f.hi, kk):
            if kv == 0:
                out *= b - a
            else:
                out *= (np.exp(2j * math.pi * kv * b) - np.exp(2j * math.pi * kv * a)) / (2j * math.pi * kv)
        return out
    return fourier_quadrature(f, k)


def integral(f: WeightFunction) -> complex:
    if isinstance(f, SharpWindow):
        return complex(f.amplitude) * f.volume
    return fourier(f, np.zeros(f.m))


def self_correlation(f: WeightFunction, u, analytic: bool = True) -> complex:
    """``(f * f~)(u) = int f(h) conj(f(h - u)) dh``."""
    require_smooth(f, "self_correlation")
    u = np.asarray(u, dtype=float).reshape(f.m)
    if analytic and f.has_analytic_ft:
        return complex(f.analytic_self_correlation(u))
    if isinstance(f, PolyDecay) and f.m == 1:
        return _self_correlation_polydecay_1d(f, float(u[0]))
    lo, hi = _quadrature_box(f, power=2)
    return simpson_integrate(lambda h: f(h) * np.conj(f(h - u)), lo, hi)


def _self_correlation_polydecay_1d(f: PolyDecay, u: float) -> complex:
    from scipy.integrate import quad

    def g(x):
        return f._raw(np.array([x - f.center[0]])).real * f._raw(np.array([x - u - f.center[0]])).real

    mid = f.center[0] + 0.5 * u
    parts = [quad(g, -np.inf, mid, epsabs=QUAD_TOL / 10, epsrel=1e-12, limit=500), quad(g, mid, np.inf, epsabs=QUAD_TOL / 10, epsrel=1e-12, limit=500)]
    val, err = sum(p[0] for p in parts), sum(p[1] for p in parts)
    if err > QUAD_TOL:
        raise QuadratureNotConverged(f"polydecay self-correlation error estimate {err:.2e}")
    return complex(abs(f.amplitude) ** 2 * val)


def self_correlation_many(f: WeightFunction, us) -> np.ndarray:
    us = np.asarray(us, dtype=float).reshape(-1, f.m)
    if f.has_analytic_ft:
        return np.asarray(f.analytic_self_correlation(us), dtype=complex).reshape(-1)
    return np.array([self_correlation(f, u) for u in us], dtype=complex)


def fourier_many(f: WeightFunction, ks) -> np.ndarray:
    ks = np.asarray(ks, dtype=float).reshape(-1, f.m)
    if f.has_analytic_ft:
        return np.asarray(f.analytic_fourier(ks), dtype=complex).reshape(-1)
    return np.array([fourier(f, k) for k in ks], dtype=complex)


# ---------------------------------------------------------------------------
# Truncation and periods
# ---------------------------------------------------------------------------

def tail_bound(f: WeightFunction, radius: float, det_abs: float = 1.0, box_volume_scale: float = 1.0) -> float:
    """Bound on ``sum |f(l*)|`` over lattice points with ``|l*| > radius``.

    Counts points in cube shells of half-widths ``[k, k+1]``; each shell
    holds ``(2k+2)^m - (2k)^m`` unit cubes with at most ``2 / det_abs``
    points per unit physical volume each.
    """
    m = f.m
    k0 = max(0, int(math.floor(radius / math.sqrt(m) - 1.0)) + 1)
    while (k0 + 1) * math.sqrt(m) <= radius:
        k0 += 1
    total = 0.0
    k = k0
    prefactor = 2.0 * box_volume_scale / det_abs
    while True:
        term = ((2 * k + 2) ** m - (2 * k) ** m) * f.envelope(max(radius, float(k)))
        total += term
        if term == 0.0 or (k > k0 + 10 and term < 1e-18 * max(total, 1e-300)):
            break
        if k - k0 > 10**6:
            return math.inf
        k += 1
    return prefactor * total


def truncation_radius(
    f: WeightFunction, eps: float, det_abs: float = 1.0, box_volume_scale: float = 1.0, step: float = 1.0 / 64
) -> float:
    """Smallest multiple of ``step`` whose certified tail bound is below ``eps``.

    Compactly supported weights return their support radius.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if f.support_radius is not None:
        return float(f.support_radius)
    hi = step
    while tail_bound(f, hi, det_abs, box_volume_scale) >= eps:
        hi *= 2
        if hi > 1e7:
            raise NotAdmissible(f"tail bound for {f.kind} does not reach {eps} within radius 1e7")
    lo_n, hi_n = 0, int(round(hi / step))
    while hi_n - lo_n > 1:
        mid = (lo_n + hi_n) // 2
        if tail_bound(f, mid * step, det_abs, box_volume_scale) < eps:
            hi_n = mid
        else:
            lo_n = mid
    return hi_n * step


@dataclass(frozen=True)
class PeriodResult:
    has_period: bool
    witness: np.ndarray | None
    degenerate: bool


def has_nontrivial_period(
    f: WeightFunction, search_box: Sequence[Sequence[float]] | None = None, tol: float = 1e-9, step: float = 0.05
) -> PeriodResult:
    """Scan a grid of shifts ``u != 0`` for ``max_h |f(h - u) - f(h)| <= tol``."""
    require_smooth(f, "has_nontrivial_period")
    m = f.m
    if f.is_zero:
        return PeriodResult(True, np.eye(m)[0] * step, True)
    if search_box is None:
        search_box = [[-5.0, 5.0]] * m
    sb = np.asarray(search_box, dtype=float).reshape(m, 2)
    lo, hi = f.integration_box(1e-6, 2)
    lo = np.maximum(lo, -50.0)
    hi = np.minimum(hi, 50.0)
    n_h = max(8, int(round(400 ** (1.0 / m))))
    h = np.stack(np.meshgrid(*[np.linspace(a, b, n_h) for a, b in zip(lo, hi)], indexing="ij"), -1).reshape(-1, m)
    us = np.stack(np.meshgrid(*[np.arange(a, b + step / 2, step) for a, b in sb], indexing="ij"), -1).reshape(-1, m)
    us = us[np.linalg.norm(us, axis=1) > step / 2]
    fh = f(h)
    for u in us:
        if np.max(np.abs(f(h - u) - fh)) <= tol:
            return PeriodResult(True, u, False)
    return PeriodResult(False, None, False)
