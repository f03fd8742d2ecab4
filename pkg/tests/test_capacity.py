from math import factorial, pi

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import dims, seeds, spd
from qpolar.capacity import (
    ELLIPSOID_NU_MAX,
    PRODUCT_SCALING,
    capacity_ellipsoid,
    capacity_quantum_threshold,
    cmax_product,
    isoperimetric_check,
    max_dual_scaling,
    phase_ellipsoid_volume,
)
from qpolar.errors import DimensionMismatch, SpaceMismatch, UnsupportedBody
from qpolar.gaussian import PhaseEllipsoid, quantum_condition, random_cov_state
from qpolar.polarity import EllipsoidBody, Space, random_quantum_pair
from qpolar.symplectic import random_symplectic, symplectic_inverse


def pos(A, level=1.0):
    return EllipsoidBody(Space.POSITION, np.atleast_2d(A), level)


def mom(B, level=1.0):
    return EllipsoidBody(Space.MOMENTUM, np.atleast_2d(B), level)


@pytest.mark.parametrize("hbar", [1.0, 0.5, 3.0])
@pytest.mark.parametrize("scale, expected", [(0.5, 1.0), (0.25, 0.5)])
def test_capacity_of_round_covariance(hbar, scale, expected):
    sigma = scale * hbar * np.eye(4)
    omega = PhaseEllipsoid(0.5 * hbar * np.linalg.inv(sigma), hbar)
    rep = capacity_ellipsoid(omega)
    assert rep.formula == ELLIPSOID_NU_MAX
    assert rep.value == pytest.approx(expected * pi * hbar, rel=1e-14)


def test_capacity_uses_largest_symplectic_eigenvalue():
    # diag(a, b) blocks pair mode j as sqrt(a_j b_j): here nu = {1, 4}.
    M = np.diag([1.0, 2.0, 1.0, 8.0])
    rep = capacity_ellipsoid(M)
    np.testing.assert_allclose(rep.witnesses, [1.0, 4.0], rtol=1e-14)
    assert rep.value == pytest.approx(pi / 4, rel=1e-14)


@given(seeds, dims)
def test_capacity_is_symplectic_invariant(seed, n):
    M = spd(seed, 2 * n)
    S = random_symplectic(seed + 1, n)
    Si = symplectic_inverse(S)
    moved = Si.T @ M @ Si
    moved = 0.5 * (moved + moved.T)
    cond = np.linalg.cond(moved)
    c0 = capacity_ellipsoid(M).value
    c1 = capacity_ellipsoid(moved).value
    assert c1 == pytest.approx(c0, rel=max(1e-9, 10 * np.finfo(float).eps * cond))


@given(seeds, dims, st.floats(min_value=0.1, max_value=10.0))
def test_capacity_is_conformal(seed, n, r):
    M = spd(seed, 2 * n)
    c0 = capacity_ellipsoid(M).value
    assert capacity_ellipsoid(M / r**2).value == pytest.approx(r**2 * c0, rel=1e-10)


@given(seeds, dims)
def test_capacity_is_monotone(seed, n):
    big = spd(seed, 2 * n)
    small = big + spd(seed + 1, 2 * n)
    assert capacity_ellipsoid(small).value <= capacity_ellipsoid(big).value * (1 + 1e-12)


@given(seeds, dims)
def test_capacity_threshold_matches_symplectic_eigenvalue_test(seed, n):
    cov = random_cov_state(seed, n, kind="any")
    rep = capacity_quantum_threshold(cov)
    assert rep.quantum == quantum_condition(cov).holds


def test_cmax_one_dimensional_rectangle():
    # X = [-1, 1], P = [-2, 2]: the rectangle has area 8.
    rep = cmax_product(pos(1.0), mom(0.25))
    assert rep.formula == PRODUCT_SCALING
    assert rep.value == pytest.approx(8.0, rel=1e-14)
    assert rep.extra["scaling_eigen"] == pytest.approx(2.0, rel=1e-14)
    assert rep.extra["scaling_loewner"] == pytest.approx(2.0, rel=1e-12)
    assert rep.extra["inverse_eigenvalue_formula"] == pytest.approx(16.0, rel=1e-14)
    assert not rep.extra["inverse_eigenvalue_formula_matches"]


def test_cmax_saturated_pair_is_four_hbar():
    A = np.diag([3.0, 0.5])
    for hbar in (1.0, 0.2):
        rep = cmax_product(pos(A, hbar), mom(np.linalg.inv(A), hbar), hbar)
        assert rep.value == pytest.approx(4 * hbar, rel=1e-14)
        assert rep.extra["inverse_eigenvalue_formula_matches"]


@pytest.mark.parametrize(
    "a, b", [([1.0, 2.0], [0.3, 0.1]), ([4.0, 1.0, 0.5], [0.2, 0.9, 1.5])]
)
def test_cmax_diagonal_matches_smallest_rectangle(a, b):
    a, b = np.array(a), np.array(b)
    rep = cmax_product(pos(np.diag(a)), mom(np.diag(b)))
    assert rep.value == pytest.approx(np.min(4 / np.sqrt(a * b)), rel=1e-13)


@given(seeds, dims)
def test_cmax_routes_agree_for_noncommuting_pairs(seed, n):
    A, B = random_quantum_pair(seed, n)
    rep = cmax_product(pos(A), mom(B))
    assert rep.extra["route_disagreement"] < 1e-12
    assert rep.value >= 4 * (1 - 1e-12)


def test_cmax_rejects_swapped_spaces_and_dimensions():
    with pytest.raises(SpaceMismatch):
        cmax_product(mom(1.0), pos(1.0))
    with pytest.raises(DimensionMismatch):
        cmax_product(pos(np.eye(2)), mom(1.0))


def test_max_dual_scaling_exact_dyadic():
    assert max_dual_scaling(np.eye(1), np.eye(1) / 16) == pytest.approx(4.0, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_isoperimetric_equality_on_balls(n):
    rep = isoperimetric_check(PhaseEllipsoid(np.eye(2 * n)))
    assert rep.lhs == pytest.approx(pi, rel=1e-14)
    assert rep.rhs == pytest.approx(pi, rel=1e-13)
    assert rep.holds


def test_isoperimetric_product_of_unit_discs():
    rep = isoperimetric_check((pos(np.eye(2)), mom(np.eye(2))))
    assert rep.lhs == pytest.approx(4.0, rel=1e-14)
    assert rep.rhs == pytest.approx(np.sqrt(2) * pi, rel=1e-14)
    assert rep.rhs == pytest.approx(4.443, abs=5e-4)
    assert rep.holds


@given(seeds, dims)
def test_isoperimetric_holds_for_random_ellipsoids(seed, n):
    assert isoperimetric_check(PhaseEllipsoid(spd(seed, 2 * n))).holds


def test_phase_ellipsoid_volume_of_unit_ball():
    for n in (1, 2, 3):
        v = phase_ellipsoid_volume(PhaseEllipsoid(np.eye(2 * n)))
        assert v == pytest.approx(pi**n / factorial(n), rel=1e-14)


def test_isoperimetric_rejects_other_bodies():
    with pytest.raises(UnsupportedBody):
        isoperimetric_check(np.eye(2))
