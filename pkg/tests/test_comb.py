import math

import numpy as np
import pytest

from cpcomb.comb import (
    combs_equal,
    generate_comb,
    hull_element,
    make_decoration,
    translate,
)
from cpcomb.errors import NonSmoothWeight
from cpcomb.lattice import Box
from cpcomb.scheme import TorusPoint, torus_point
from cpcomb.weights import Gaussian, SharpWindow

from conftest import PHI


def brute_comb(s, k, box_hi, radius, width=1.0):
    """Direct double loop over lattice coordinates, no enumeration helpers."""
    out = []
    for b in range(-int(box_hi) - 20, int(box_hi) + 20):
        for a in range(-2 * int(box_hi) - 40, 2 * int(box_hi) + 40):
            x = a + b * PHI + s
            h = a - b / PHI + k
            if 0 <= x <= box_hi and abs(h) <= radius:
                out.append((x, math.exp(-math.pi * h * h / width**2)))
    out.sort()
    return np.array(out)


def test_golden_atom_at_phi_squared(golden, gauss, unit_dec):
    comb = generate_comb(golden, gauss, unit_dec, Box([0.0], [10.0]))
    i = int(np.argmin(np.abs(comb.positions[:, 0] - PHI**2)))
    assert comb.positions[i, 0] == pytest.approx(PHI**2, abs=1e-12)
    assert comb.weights[i].real == pytest.approx(math.exp(-math.pi * (2 - PHI) ** 2), rel=1e-12)
    assert comb.weights[i].real == pytest.approx(0.6323, abs=1e-4)


def test_origin_atom_has_unit_weight(golden, gauss, unit_dec):
    comb = generate_comb(golden, gauss, unit_dec, Box([0.0], [5.0]))
    assert comb.positions[0, 0] == 0.0
    assert comb.weights[0] == pytest.approx(1.0)


def test_matches_brute_force_at_shifted_torus_point(golden, gauss, unit_dec):
    xi = torus_point(golden, 0.3, 0.2)
    comb = hull_element(golden, gauss, unit_dec, xi, Box([0.0], [60.0]))
    ref = brute_comb(0.3, 0.2, 60.0, comb.internal_radius)
    assert len(comb) == len(ref)
    np.testing.assert_allclose(comb.positions[:, 0], ref[:, 0], atol=1e-9)
    np.testing.assert_allclose(comb.weights.real, ref[:, 1], atol=1e-12)
    np.testing.assert_allclose(comb.weights.imag, 0.0, atol=1e-15)


def test_positions_sorted_and_inside_box(golden, gauss, unit_dec):
    box = Box([-20.0], [35.0])
    comb = generate_comb(golden, gauss, unit_dec, box)
    assert np.all(np.diff(comb.positions[:, 0]) > 0)
    assert np.all(box.contains(comb.positions))


def test_truncated_tail_within_eps(golden, gauss, unit_dec):
    comb = generate_comb(golden, gauss, unit_dec, Box([0.0], [200.0]), eps_trunc=1e-8)
    wide = brute_comb(0.0, 0.0, 200.0, 8.0)
    dropped = wide[:, 1].sum() - comb.weights.real.sum()
    assert 0 <= dropped <= 1e-8 * 200.0


def test_zero_weight_decoration_gives_empty_comb(golden, gauss):
    dec = make_decoration(golden, [([0.0], [0.0], 0.0)])
    comb = generate_comb(golden, gauss, dec, Box([0.0], [50.0]))
    assert len(comb) == 0


def test_decoration_atoms_reduced_to_fundamental_cell(golden):
    dec = make_decoration(golden, [([1.0 + PHI], [1.0 - 1 / PHI], 1.0)])
    np.testing.assert_allclose(dec.s, [[0.0]], atol=1e-12)
    np.testing.assert_allclose(dec.k, [[0.0]], atol=1e-12)


def test_decoration_dimension_checked(golden):
    with pytest.raises(ValueError):
        make_decoration(golden, [([0.0, 0.0], [0.0], 1.0)])


def test_two_atom_comb_is_union(golden, gauss):
    box = Box([0.0], [80.0])
    a = ([0.0], [0.0], 1.0)
    b = ([0.5], [0.2], 0.5 + 0.5j)
    both = generate_comb(golden, gauss, make_decoration(golden, [a, b]), box)
    ca = generate_comb(golden, gauss, make_decoration(golden, [a]), box)
    cb = generate_comb(golden, gauss, make_decoration(golden, [b]), box)
    assert len(both) == len(ca) + len(cb)
    assert both.weights.sum() == pytest.approx(ca.weights.sum() + cb.weights.sum(), abs=1e-10)


def test_coinciding_atoms_merge(golden, gauss):
    box = Box([0.0], [40.0])
    single = generate_comb(golden, gauss, make_decoration(golden), box)
    doubled = generate_comb(golden, gauss, make_decoration(golden, [([0.0], [0.0], 1.0)] * 2), box)
    np.testing.assert_allclose(doubled.positions, single.positions)
    np.testing.assert_allclose(doubled.weights, 2 * single.weights, atol=1e-14)


def test_lift_independence(golden, gauss, unit_dec):
    box = Box([0.0], [100.0])
    xi = torus_point(golden, 0.37, -0.11)
    shifted = TorusPoint(xi.fractional, xi.lift + golden.basis.point([3, -2]))
    a = hull_element(golden, gauss, unit_dec, xi, box)
    b = hull_element(golden, gauss, unit_dec, shifted, box)
    assert combs_equal(a, b)


def test_translate_identity_and_inverse(golden, gauss, unit_dec):
    comb = generate_comb(golden, gauss, unit_dec, Box([0.0], [30.0]))
    assert combs_equal(translate(comb, 0.0), comb)
    assert combs_equal(translate(translate(comb, 2.5), -2.5), comb)


def test_translation_equivariance(golden, gauss, unit_dec):
    t = 1.75
    box = Box([0.0], [50.0])
    xi = torus_point(golden, 0.2, 0.1)
    moved = hull_element(golden, gauss, unit_dec, torus_point(golden, 0.2 + t, 0.1), box.shifted(t))
    base = hull_element(golden, gauss, unit_dec, xi, box)
    assert combs_equal(translate(base, t), moved)


def test_translation_bounded_mass(golden, gauss, unit_dec):
    comb = generate_comb(golden, gauss, unit_dec, Box([-500.0], [500.0]))
    masses = [np.abs(comb.restrict(Box([x], [x + 1.0])).weights).sum() for x in np.arange(-500, 499, 7.0)]
    assert max(masses) <= 2 / golden.det_abs * 2 + 1


def test_combs_equal_detects_difference(golden, gauss, unit_dec):
    comb = generate_comb(golden, gauss, unit_dec, Box([0.0], [20.0]))
    assert not combs_equal(comb, translate(comb, 1e-6))


def test_sharp_window_needs_opt_in(golden, unit_dec):
    w = SharpWindow([-0.5], [0.5])
    with pytest.raises(NonSmoothWeight):
        generate_comb(golden, w, unit_dec, Box([0.0], [10.0]))
    comb = generate_comb(golden, w, unit_dec, Box([0.0], [10.0]), allow_nonsmooth=True)
    assert np.all(comb.weights == 1.0)


def test_complex_amplitude_carried(golden, unit_dec):
    f = Gaussian(m=1, width=1.0, amplitude=2j)
    comb = generate_comb(golden, f, unit_dec, Box([0.0], [10.0]))
    assert comb.weights[0] == pytest.approx(2j)
