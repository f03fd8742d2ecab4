import numpy as np
import pytest
from hypothesis import given

from conftest import dims, seeds, spd
from qpolar.errors import DimensionMismatch, PhaseSpaceBody, SpaceMismatch
from qpolar.matcore import rel_err
from qpolar.polarity import (
    BoxBody,
    CrossPolytopeBody,
    EllipsoidBody,
    FramedBody,
    Space,
    is_quantum_pair,
    lagrangian_polar_dual,
    model_coordinates,
    omega,
    polar_dual,
    random_quantum_pair,
    support_function,
)
from qpolar.symplectic import random_symplectic


def _sphere(rng, m, d):
    u = rng.standard_normal((m, d))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def test_space_dual():
    assert Space.POSITION.dual() is Space.MOMENTUM
    assert Space.MOMENTUM.dual() is Space.POSITION
    with pytest.raises(PhaseSpaceBody):
        Space.PHASE.dual()


@pytest.mark.parametrize("R, hbar", [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)])
def test_ball_dual_radius(R, hbar):
    D = polar_dual(EllipsoidBody.ball("position", 3, R), hbar)
    assert D.space is Space.MOMENTUM
    radius = np.sqrt(D.level / D.A[0, 0])
    assert radius == pytest.approx(hbar / R, rel=1e-14)


def test_interval_dual():
    sxx, hbar = 0.7, 1.0
    a = np.sqrt(2 * sxx)
    D = polar_dual(BoxBody("position", [a]), hbar)
    back = polar_dual(D, hbar)
    assert isinstance(D, CrossPolytopeBody)
    assert D.level / D.weights[0] == pytest.approx(hbar / a, rel=1e-15)
    assert back.half_widths[0] == pytest.approx(a, rel=1e-15)


def test_ellipsoid_dual_shape():
    D = polar_dual(EllipsoidBody("position", np.diag([2.0, 0.5]), 1.0), 1.0)
    assert np.allclose(D.A, np.diag([0.5, 2.0]))
    assert D.level == 1.0


def test_phase_space_body_rejected():
    with pytest.raises(PhaseSpaceBody):
        polar_dual(EllipsoidBody("phase", np.eye(2), 1.0))


@pytest.mark.parametrize(
    "body, volume",
    [
        (EllipsoidBody.ball("position", 2, 1.0), np.pi),
        (EllipsoidBody.ball("position", 3, 2.0), 4 / 3 * np.pi * 8),
        (BoxBody("position", [1.0, 2.0, 0.5]), 8.0),
        (CrossPolytopeBody("momentum", [1.0, 1.0], 1.0), 2.0),
        (CrossPolytopeBody("momentum", [1.0, 2.0, 4.0], 1.0), 8 / 6 / 8),
    ],
)
def test_volumes(body, volume):
    assert body.volume == pytest.approx(volume, rel=1e-14)


@pytest.mark.parametrize(
    "body, direction, value",
    [
        (EllipsoidBody.ball("position", 3, 1.0), [0.3, -0.4, 0.5], 1.0),
        (BoxBody("position", [1.0, 3.0]), [1.0, 0.0], 1.0),
        (BoxBody("position", [1.0, 3.0]), [0.0, -2.0], 3.0),
        (CrossPolytopeBody("position", [1.0, 2.0], 2.0), [0.0, 1.0], 1.0),
    ],
)
def test_support_function_examples(body, direction, value):
    assert support_function(body, direction) == pytest.approx(value, rel=1e-14)


@given(seeds, dims)
def test_support_function_membership(seed, n):
    rng = np.random.default_rng(seed)
    X = EllipsoidBody("position", spd(seed, n), 1.0)
    D = polar_dual(X)
    u = rng.standard_normal((50, n)) * rng.uniform(0.1, 3.0, (50, 1))
    for v in u:
        h = support_function(X, v) * np.linalg.norm(v)
        if abs(h - 1.0) > 1e-9:
            assert bool(D.contains(v)[0]) == (h <= 1.0)


@given(seeds, dims)
def test_biduality(seed, n):
    rng = np.random.default_rng(seed)
    X = EllipsoidBody("position", spd(seed, n), rng.uniform(0.2, 3.0))
    back = polar_dual(polar_dual(X, 1.3), 1.3)
    assert rel_err(back.A / back.level, X.A / X.level) <= 1e-9
    box = BoxBody("position", rng.uniform(0.1, 5.0, n))
    assert rel_err(polar_dual(polar_dual(box, 0.7), 0.7).half_widths, box.half_widths) <= 1e-12


@given(seeds, dims)
def test_antimonotonicity(seed, n):
    AY = spd(seed, n)
    AX = AY + spd(seed + 1, n)
    DX = polar_dual(EllipsoidBody("position", AX, 1.0)).A
    DY = polar_dual(EllipsoidBody("position", AY, 1.0)).A
    # X ⊆ Y, so Y^hbar ⊆ X^hbar: the shape of Y^hbar dominates.
    assert np.linalg.eigvalsh(DY - DX).min() >= -1e-12


@given(seeds, dims)
def test_scaling_rule(seed, n):
    rng = np.random.default_rng(seed)
    A = spd(seed, n)
    L = np.eye(n) + 0.4 * rng.standard_normal((n, n))
    Li = np.linalg.inv(L)
    LX = EllipsoidBody("position", Li.T @ A @ Li, 1.0)
    lhs = polar_dual(LX).A
    # (L^T)^{-1} X^hbar has shape L (A^{-1}) L^T.
    rhs = L @ np.linalg.inv(A) @ L.T
    assert rel_err(lhs, rhs) <= 1e-9


def test_pair_examples():
    I = np.eye(3)
    sat = is_quantum_pair(EllipsoidBody("position", I, 1.0), EllipsoidBody("momentum", I, 1.0))
    assert sat.is_pair and sat.is_saturated and np.allclose(sat.lam, 1.0)
    half = is_quantum_pair(EllipsoidBody("position", I, 1.0),
                           EllipsoidBody("momentum", I / 2, 1.0))
    assert half.is_pair and not half.is_saturated and np.allclose(half.lam, 0.5)
    bad = is_quantum_pair(EllipsoidBody("position", 2 * I, 1.0),
                          EllipsoidBody("momentum", I, 1.0))
    assert not bad.is_pair and bad.witness is not None


@given(seeds, dims)
def test_witness_violates_pair(seed, n):
    A = spd(seed, n)
    B = np.linalg.inv(A) * 1.5
    X = EllipsoidBody("position", A, 2.0)
    P = EllipsoidBody("momentum", B * 2.0, 2.0)
    rep = is_quantum_pair(X, P, hbar=2.0)
    assert not rep.is_pair
    w = rep.witness
    assert polar_dual(X, 2.0).contains(w, slack=1e-9)[0]
    assert not P.contains(w)[0]
    # sup over X of w.x equals hbar on the boundary of X^hbar.
    assert support_function(X, w) * np.linalg.norm(w) == pytest.approx(2.0, rel=1e-9)


def test_pair_level_normalization():
    X = EllipsoidBody("position", 3 * np.eye(2), 3.0)
    P = EllipsoidBody("momentum", 0.5 * np.eye(2), 0.5)
    assert is_quantum_pair(X, P).is_saturated


def test_pair_errors():
    with pytest.raises(SpaceMismatch):
        is_quantum_pair(EllipsoidBody("momentum", np.eye(2), 1.0),
                        EllipsoidBody("momentum", np.eye(2), 1.0))
    with pytest.raises(DimensionMismatch):
        is_quantum_pair(EllipsoidBody("position", np.eye(2), 1.0),
                        EllipsoidBody("momentum", np.eye(3), 1.0))


@given(seeds, dims)
def test_pair_extension(seed, n):
    A, B = random_quantum_pair(seed, n)
    X = EllipsoidBody("position", A, 1.0)
    P = EllipsoidBody("momentum", B, 1.0)
    Y = EllipsoidBody("position", A / 2, 1.0)
    Q = EllipsoidBody("momentum", B / 3, 1.0)
    assert is_quantum_pair(X, P).is_pair and is_quantum_pair(Y, Q).is_pair


@given(seeds, dims)
def test_saturation_iff_inverse(seed, n):
    A = spd(seed, n)
    X = EllipsoidBody("position", A, 1.0)
    assert is_quantum_pair(X, EllipsoidBody("momentum", np.linalg.inv(A), 1.0)).is_saturated
    assert not is_quantum_pair(X, EllipsoidBody("momentum", 0.99 * np.linalg.inv(A),
                                                1.0)).is_saturated


def test_lagrangian_identity_frame_matches_polar_dual():
    X = EllipsoidBody("position", np.diag([2.0, 0.5]), 1.0)
    D = lagrangian_polar_dual(FramedBody(np.eye(4), X))
    assert np.allclose(D.frame, np.eye(4))
    assert np.allclose(D.body.A, polar_dual(X).A)


@given(seeds, dims)
def test_lagrangian_dual_is_omega_dual(seed, n):
    rng = np.random.default_rng(seed)
    S = random_symplectic(seed, n)
    X = FramedBody(S, EllipsoidBody("position", spd(seed + 1, n), 1.0))
    D = lagrangian_polar_dual(X)
    # Boundary points of both bodies: max |omega| over pairs is hbar.
    A, B = X.body.A, D.body.A
    u = _sphere(rng, 200, n)
    x = u / np.sqrt(np.einsum("ij,jk,ik->i", u, A, u))[:, None]
    v = _sphere(rng, 200, n)
    p = v / np.sqrt(np.einsum("ij,jk,ik->i", v, B, v))[:, None]
    w = np.abs(omega(X.embed(x), D.embed(p)))
    assert w.max() <= 1 + 1e-9
    # The maximizer for a given x is attained: p = A x / sqrt(A x.x).
    p_star = x @ A / np.sqrt(np.einsum("ij,jk,ik->i", x, A, x))[:, None]
    hits = np.abs(np.einsum("ii->i", omega(X.embed(x), D.embed(p_star))))
    assert np.allclose(hits, 1.0, rtol=1e-9)


@given(seeds, dims)
def test_lagrangian_covariance_and_biduality(seed, n):
    S = random_symplectic(seed, n)
    S0 = random_symplectic(seed + 5, n)
    X = FramedBody(S, EllipsoidBody("position", spd(seed + 1, n), 1.0))
    left = lagrangian_polar_dual(X.transformed(S0))
    right = lagrangian_polar_dual(X).transformed(S0)
    assert rel_err(left.frame, right.frame) <= 1e-12
    assert rel_err(left.body.A, right.body.A) <= 1e-12
    back = lagrangian_polar_dual(lagrangian_polar_dual(X))
    assert rel_err(back.body.A, X.body.A) <= 1e-9
    assert back.body.space is Space.POSITION


@given(seeds, dims)
def test_model_coordinates_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    X = FramedBody(random_symplectic(seed, n), EllipsoidBody("momentum", np.eye(n), 1.0))
    u = rng.standard_normal((5, n))
    assert np.allclose(model_coordinates(X, X.embed(u)), u, atol=1e-9)
