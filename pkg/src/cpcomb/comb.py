"""Finite realizations of weighted Dirac combs and their hull elements."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree

from .lattice import Box, enumerate_in_box, reduce_to_fundamental
from .scheme import SchemeSpec, TorusPoint, torus_point
from .weights import WeightFunction, admissibility_certificate, require_smooth, truncation_radius

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class Decoration:
    """Finite atomic measure on a fundamental cell: atoms ``(s_j, k_j, w_j)``."""

    s: np.ndarray  # (J, d)
    k: np.ndarray  # (J, m)
    w: np.ndarray  # (J,) complex

    def __len__(self) -> int:
        return self.w.size

    @property
    def total_weight(self) -> complex:
        return complex(self.w.sum())

    def scaled(self, c: complex) -> "Decoration":
        return Decoration(self.s, self.k, self.w * c)

    def to_list(self) -> list[dict]:
        return [
            {"s": s.tolist(), "k": k.tolist(), "w": [float(w.real), float(w.imag)]}
            for s, k, w in zip(self.s, self.k, self.w)
        ]


def make_decoration(scheme: SchemeSpec, atoms: Sequence[tuple] | None = None) -> Decoration:
    """Build a decoration, reducing every atom position to the fundamental cell.

    ``atoms`` is a sequence of ``(s, k, w)``; ``None`` gives the single unit
    atom at the origin.
    """
    if atoms is None:
        atoms = [(np.zeros(scheme.d), np.zeros(scheme.m), 1.0)]
    if len(atoms) < 1:
        raise ValueError("decoration needs at least one atom")
    ss, ks, ws = [], [], []
    for s, k, w in atoms:
        lift = np.concatenate([np.atleast_1d(np.asarray(s, float)), np.atleast_1d(np.asarray(k, float))])
        if lift.size != scheme.d + scheme.m:
            raise ValueError(f"decoration atom has dimension {lift.size}, expected {scheme.d + scheme.m}")
        _, rep = reduce_to_fundamental(scheme.basis, lift)
        ss.append(rep[: scheme.d])
        ks.append(rep[scheme.d :])
        ws.append(complex(w))
    return Decoration(np.array(ss), np.array(ks), np.array(ws, dtype=complex))


@dataclass(frozen=True)
class WeightedComb:
    """Atoms (position, weight) of a comb restricted to ``physical_box``."""

    positions: np.ndarray  # (N, d)
    weights: np.ndarray  # (N,) complex
    physical_box: Box
    internal_radius: float
    trunc_eps: float
    origin: TorusPoint | None = None

    def __len__(self) -> int:
        return self.weights.size

    @property
    def d(self) -> int:
        return self.physical_box.dim

    def restrict(self, box: Box) -> "WeightedComb":
        keep = box.contains(self.positions)
        return replace(self, positions=self.positions[keep], weights=self.weights[keep], physical_box=box)

    def total_abs_weight(self) -> float:
        return float(np.abs(self.weights).sum())


def _sort_atoms(pos: np.ndarray, w: np.ndarray):
    order = np.lexsort(pos.T[::-1]) if len(pos) else np.zeros(0, dtype=int)
    return pos[order], w[order]


def _merge_atoms(pos: np.ndarray, w: np.ndarray, tol: float = MERGE_TOL):
    if len(pos) < 2:
        return pos, w
    pairs = cKDTree(pos).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return pos, w
    n = len(pos)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    n_groups, labels = connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    merged_w = np.zeros(n_groups, dtype=complex)
    np.add.at(merged_w, labels, w)
    return pos[first], merged_w


def _atoms_for(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, s: np.ndarray, k: np.ndarray,
    box: Box, radius: float,
):
    positions, weights = [], []
    for s_j, k_j, w_j in zip(decoration.s, decoration.k, decoration.w):
        if w_j == 0:
            continue
        shift_s = s_j + s
        shift_k = k_j + k
        region = Box(
            np.concatenate([box.lo - shift_s, -radius - shift_k]),
            np.concatenate([box.hi - shift_s, radius - shift_k]),
        )
        pts = enumerate_in_box(scheme.basis, region).points
        internal = pts[:, scheme.d :] + shift_k
        inside = np.linalg.norm(internal, axis=1) <= radius
        positions.append(pts[inside, : scheme.d] + shift_s)
        weights.append(w_j * f(internal[inside]))
    if not positions:
        return np.zeros((0, scheme.d)), np.zeros(0, dtype=complex)
    pos = np.concatenate(positions)
    w = np.concatenate(weights)
    if len(positions) > 1:
        pos, w = _merge_atoms(pos, w)
    # lattice points can sit a hair outside the box after the shift
    keep = box.contains(pos)
    return _sort_atoms(pos[keep], w[keep])


def hull_element(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, xi: TorusPoint,
    physical_box: Box, eps_trunc: float = 1e-12, allow_nonsmooth: bool = False,
) -> WeightedComb:
    """Atoms ``(l + s_j + s, w_j f(l* + k_j + k))`` for the lift ``(s, k)`` of ``xi``.

    Lattice points are kept when the position falls in ``physical_box`` and
    ``|l* + k_j + k|`` is within the certified truncation radius.
    """
    if f.non_smooth:
        if not allow_nonsmooth:
            require_smooth(f, "hull_element")
    else:
        admissibility_certificate(f, scheme.det_abs)
    radius = truncation_radius(f, eps_trunc, scheme.det_abs)
    s, k = xi.s(scheme.d), xi.k(scheme.d)
    pos, w = _atoms_for(scheme, f, decoration, s, k, physical_box, radius)
    return WeightedComb(pos, w, physical_box, radius, eps_trunc, xi)


def generate_comb(
    scheme: SchemeSpec, f: WeightFunction, decoration: Decoration, physical_box: Box,
    eps_trunc: float = 1e-12, allow_nonsmooth: bool = False,
) -> WeightedComb:
    origin = torus_point(scheme, np.zeros(scheme.d), np.zeros(scheme.m))
    return hull_element(scheme, f, decoration, origin, physical_box, eps_trunc, allow_nonsmooth)


def translate(comb: WeightedComb, t) -> WeightedComb:
    t = np.asarray(t, dtype=float).reshape(comb.d)
    return replace(comb, positions=comb.positions + t, physical_box=comb.physical_box.shifted(t))


def combs_equal(a: WeightedComb, b: WeightedComb, pos_tol: float = 1e-9, weight_tol: float = 1e-10) -> bool:
    """Multiset equality of atoms up to tolerances."""
    if len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    pa, wa = _sort_atoms(a.positions, a.weights)
    pb, wb = _sort_atoms(b.positions, b.weights)
    return bool(np.all(np.abs(pa - pb) <= pos_tol) and np.all(np.abs(wa - wb) <= weight_tol))
