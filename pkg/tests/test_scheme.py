import math

import numpy as np
import pytest

from cpcomb.errors import InjectivityFailed
from cpcomb.lattice import make_basis, reduce_to_fundamental
from cpcomb.scheme import (
    find_injectivity_witness,
    iota,
    kappa,
    star_image_coverage,
    star_map,
    torus_add,
    torus_distance,
    torus_point,
    validate_scheme,
)

from conftest import PHI


def test_star_map_origin(golden):
    l, ls = star_map(golden, [0, 0])
    assert l.tolist() == [0.0] and ls.tolist() == [0.0]


def test_star_map_golden_point(golden):
    # B @ (1, 1) by hand: (1 + phi, 1 - 1/phi)
    l, ls = star_map(golden, [1, 1])
    assert l[0] == pytest.approx(1 + PHI, abs=1e-12)
    assert ls[0] == pytest.approx(1 - 1 / PHI, abs=1e-12)
    assert l[0] == pytest.approx(2.6180340, abs=1e-7)
    assert ls[0] == pytest.approx(0.3819660, abs=1e-7)


def test_star_map_additive(golden, rng):
    for _ in range(50):
        z1, z2 = rng.integers(-100, 100, size=(2, 2))
        a, b, c = star_map(golden, z1), star_map(golden, z2), star_map(golden, z1 + z2)
        np.testing.assert_allclose(a[0] + b[0], c[0], atol=1e-9)
        np.testing.assert_allclose(a[1] + b[1], c[1], atol=1e-9)


def test_golden_certificates(golden):
    assert golden.validation.injectivity_ok
    assert golden.validation.denseness_ok


def test_golden_injective_to_radius_1000(golden_basis):
    assert find_injectivity_witness(1, 1, golden_basis, 1000) is None


def test_swapped_axes_fail_injectivity():
    with pytest.raises(InjectivityFailed) as info:
        validate_scheme(1, 1, make_basis([[0, 1], [1, 0]]), 100, 0.05)
    assert info.value.witness.tolist() == [1, 0]


def test_integer_lattice_star_image_is_discrete():
    # Z^2 has lattice point (0, 1) with zero physical part, so it also fails injectivity
    ident = make_basis([[1, 0], [0, 1]])
    assert star_image_coverage(1, 1, ident, 100, 0.05) < 1.0
    with pytest.raises(InjectivityFailed) as info:
        validate_scheme(1, 1, ident, 100, 0.05)
    assert info.value.witness.tolist() == [0, 1]


def test_rational_internal_lattice_not_dense():
    # injective (1 and sqrt2 independent) but star images are integers
    spec = validate_scheme(1, 1, make_basis([[1, 1], [math.sqrt(2), 0]]), 100, 0.05, allow_nondense=True)
    assert spec.validation.injectivity_ok
    assert not spec.validation.denseness_ok
    assert spec.validation.denseness_overridden


def test_two_dimensional_scheme_validates(rng):
    B = make_basis(np.eye(4) + 0.37 * rng.normal(size=(4, 4)))
    spec = validate_scheme(2, 2, B, 10, 0.2)
    assert spec.validation.injectivity_ok


def test_torus_origin(golden):
    assert np.all(torus_point(golden, 0, 0).fractional == 0)


def test_lattice_points_vanish_on_torus(golden, rng):
    for z in rng.integers(-500, 500, size=(100, 2)):
        l, ls = star_map(golden, z)
        xi = torus_point(golden, l, ls)
        assert torus_distance(xi, torus_point(golden, 0, 0)) < 1e-9


def test_torus_point_constant_on_orbits(golden, rng):
    for _ in range(100):
        s, k = rng.uniform(-5, 5, size=2)
        l, ls = star_map(golden, rng.integers(-200, 200, size=2))
        a, b = torus_point(golden, s, k), torus_point(golden, s + l, k + ls)
        assert torus_distance(a, b) < 1e-10


def test_torus_addition_matches_reduction(golden, rng):
    for _ in range(50):
        a = torus_point(golden, *rng.uniform(-10, 10, size=2))
        b = torus_point(golden, *rng.uniform(-10, 10, size=2))
        frac, _ = reduce_to_fundamental(golden.basis, a.lift + b.lift)
        summed = torus_add(golden, a, b)
        diff = np.abs(summed.fractional - frac)
        assert np.all(np.minimum(diff, 1 - diff) < 1e-10)
        fsum = np.mod(a.fractional + b.fractional, 1.0)
        diff = np.abs(summed.fractional - fsum)
        assert np.all(np.minimum(diff, 1 - diff) < 1e-10)


def test_iota_homomorphism(golden, rng):
    assert torus_distance(iota(golden, 0), torus_point(golden, 0, 0)) == 0
    for t1, t2 in rng.uniform(-100, 100, size=(50, 2)):
        assert torus_distance(iota(golden, t1 + t2), torus_add(golden, iota(golden, t1), iota(golden, t2))) < 1e-9
    assert torus_distance(kappa(golden, 0.25), torus_point(golden, 0, 0.25)) == 0


def test_iota_dense_range(golden):
    step = 0.1 * math.sqrt(2)
    frac = np.array([iota(golden, step * n).fractional for n in range(10001)])
    cells = np.minimum((frac / 0.02).astype(int), 49)
    assert len({tuple(c) for c in cells}) == 50 * 50


def test_iota_of_rational_progression_is_trapped(golden):
    # dual vector z=(2,1) has physical part exactly 1, so iota(0.1 n) lies in a
    # closed subgroup of index 10 and cannot fill the torus
    frac = np.array([iota(golden, 0.1 * n).fractional for n in range(10001)])
    phase = frac @ np.array([2.0, 1.0])
    np.testing.assert_allclose(np.mod(10 * phase + 0.5, 1.0) - 0.5, 0.0, atol=1e-8)
