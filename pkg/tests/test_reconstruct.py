import numpy as np
import pytest
from hypothesis import given

from conftest import dims, seeds, spd
from qpolar.errors import NotQuantumPair, SubHeisenberg
from qpolar.gaussian import CovState, project, purity
from qpolar.matcore import rel_err, sym_sqrt
from qpolar.polarity import random_quantum_pair
from qpolar.reconstruct import (
    SIGN_PAIR,
    UNIQUE,
    correlation_root,
    max_volume_probe,
    max_volume_state,
    pauli_1d,
    pure_identity_residual,
    reconstruct_pair,
    reconstruct_saturated,
    uniqueness_probe,
)

R3 = np.sqrt(3) / 2


def pure_sigma(W, Y, hbar=1.0):
    Wi = np.linalg.inv(W)
    return 0.5 * hbar * np.block([[Wi, -Wi @ Y], [-Y @ Wi, W + Y @ Wi @ Y]])


def test_pauli_1d_worked_example():
    sol = pauli_1d(1.0, 1.0)
    assert sol.ambiguity == SIGN_PAIR
    assert sol.rank == 1
    sxp = sorted(c.sigma[0, 1] for c in sol.blob_sigmas)
    assert sxp == pytest.approx([-R3, R3], abs=1e-15)
    for part, cov in zip(sol.partners, sol.blob_sigmas):
        assert part.W[0, 0] == pytest.approx(0.5, abs=1e-15)
        assert part.Y[0, 0] == pytest.approx(-cov.sigma[0, 1], abs=1e-15)
    assert sorted(p.Y[0, 0] for p in sol.partners) == pytest.approx([-R3, R3], abs=1e-15)


@pytest.mark.parametrize("hbar", [1.0, 0.3, 2.0])
def test_pauli_1d_minimal_uncertainty_is_unique(hbar):
    sol = pauli_1d(0.7, hbar**2 / (4 * 0.7), hbar)
    assert sol.ambiguity == UNIQUE
    assert len(sol.partners) == 1
    assert sol.partners[0].Y[0, 0] == 0.0
    assert sol.partners[0].W[0, 0] == pytest.approx(hbar / 1.4)


@pytest.mark.parametrize("sxx, spp", [(0.1, 1.0), (0.5, 0.49), (1e-3, 1.0)])
def test_pauli_1d_rejects_sub_heisenberg(sxx, spp):
    with pytest.raises(SubHeisenberg):
        pauli_1d(sxx, spp)


def test_pauli_1d_rejects_nonpositive_variance():
    with pytest.raises(ValueError):
        pauli_1d(0.0, 1.0)


@given(seeds, dims)
def test_saturated_blob_has_dual_shadows(seed, n):
    A = spd(seed, n)
    sol = reconstruct_saturated(A)
    cov = sol.blob_sigmas[0]
    OX, OP = project(cov.ellipsoid(), cov.tol)
    assert rel_err(OX.A, A) < 1e-10
    assert rel_err(OP.A, np.linalg.inv(A)) < 1e-10
    assert rel_err(sol.partners[0].W, A) < 1e-14
    assert not np.any(sol.partners[0].Y)
    assert purity(cov) == pytest.approx(1.0, abs=1e-10)


@given(seeds, dims)
def test_pair_partners_reproject_and_are_pure(seed, n):
    A, B = random_quantum_pair(seed, n)
    sol = reconstruct_pair(A, B)
    assert sol.ambiguity == SIGN_PAIR
    assert len(sol.partners) == 2
    for cov in sol.blob_sigmas:
        OX, OP = project(cov.ellipsoid(), cov.tol)
        assert rel_err(OX.A, A) < 1e-8
        assert rel_err(OP.A, B) < 1e-8
        assert purity(cov) == pytest.approx(1.0, abs=1e-8)
        assert pure_identity_residual(cov) < 1e-8


@given(seeds, dims)
def test_pair_partners_differ_by_sign_of_correlation(seed, n):
    A, B = random_quantum_pair(seed, n)
    plus, minus = reconstruct_pair(A, B).partners
    np.testing.assert_allclose(plus.W, minus.W, atol=1e-9 * np.abs(plus.W).max())
    np.testing.assert_allclose(plus.Y, -minus.Y, atol=1e-9 * max(1.0, np.abs(plus.Y).max()))


@given(seeds, dims)
def test_pair_recovers_state_with_definite_correlation(seed, n):
    # Build phi_WY with W^{-1/2} Y W^{-1/2} positive semidefinite, read off its
    # shadows, and check that one partner is the original state.
    rng = np.random.default_rng(seed)
    W = spd(seed, n)
    F = spd(seed + 1, n) * rng.uniform(0.1, 2.0)
    Wh = sym_sqrt(W)
    Y = Wh @ F @ Wh
    Y = 0.5 * (Y + Y.T)
    sigma = pure_sigma(W, Y)
    A = W
    B = np.linalg.inv(2 * sigma[n:, n:])
    partners = reconstruct_pair(A, B).partners
    errs = [rel_err(p.Y, Y) + rel_err(p.W, W) for p in partners]
    assert min(errs) < 1e-7


def test_shadows_fix_correlation_only_up_to_per_mode_signs():
    # Two modes with distinct eigenvalues of K admit indefinite square roots
    # as well; those states share the shadows but are not the two returned.
    W = np.eye(2)
    Y_indef = np.diag([0.5, -1.0])
    sigma = pure_sigma(W, Y_indef)
    B = np.linalg.inv(2 * sigma[2:, 2:])
    cov = CovState(sigma)
    OX, OP = project(cov.ellipsoid(), cov.tol)
    assert rel_err(OX.A, W) < 1e-14
    assert rel_err(OP.A, B) < 1e-14
    returned = [np.diag(p.Y) for p in reconstruct_pair(W, B).partners]
    assert sorted(tuple(np.round(y, 12)) for y in returned) == [(-0.5, -1.0), (0.5, 1.0)]


@given(seeds, dims)
def test_correlation_root_squares_to_excess(seed, n):
    A, B = random_quantum_pair(seed, n)
    C, k = correlation_root(A, B)
    target = np.linalg.inv(A) @ np.linalg.inv(B) - np.eye(n)
    assert rel_err(C @ C, target) < 1e-8
    AC = A @ C
    assert np.abs(AC - AC.T).max() <= 1e-9 * max(1.0, np.abs(AC).max())
    assert k.min() >= 0


def test_saturated_pair_gives_unique_solution():
    A = np.diag([2.0, 0.5])
    sol = reconstruct_pair(A, np.linalg.inv(A))
    assert sol.ambiguity == UNIQUE
    assert sol.rank == 0
    assert len(sol.partners) == 1


def test_pair_rejects_non_dual_shadows():
    A = np.diag([2.0, 1.0])
    B = np.diag([1.0, 1.0])
    with pytest.raises(NotQuantumPair):
        reconstruct_pair(A, B)
    with pytest.raises(NotQuantumPair):
        max_volume_state(A, B)


def test_uniqueness_probe_finds_only_the_saturated_blob():
    A = np.array([[2.0, 0.3], [0.3, 0.8]])
    converged, worst = uniqueness_probe(A, seed=3, trials=40)
    assert converged >= 30
    assert worst < 1e-7


def test_max_volume_state_worked_example():
    rep = max_volume_state(np.array([[1.0]]), np.array([[0.25]]))
    np.testing.assert_allclose(rep.state.cov.sigma, np.diag([0.5, 2.0]), atol=1e-15)
    assert rep.lam == pytest.approx([0.25])
    assert rep.purity == pytest.approx(0.5, abs=1e-14)
    assert rep.purity_nu == pytest.approx(0.5, abs=1e-14)
    assert rep.alternatives["prod_lambda_quarter"] == pytest.approx(np.sqrt(0.5))
    assert rep.alternatives["prod_lambda_squared"] == pytest.approx(1 / 16)
    assert rep.discrepancy


@given(seeds, dims)
def test_max_volume_purity_is_root_of_lambda_product(seed, n):
    A, B = random_quantum_pair(seed, n)
    rep = max_volume_state(A, B)
    assert rep.purity == pytest.approx(np.prod(np.sqrt(rep.lam)), rel=1e-8)
    nu = rep.state.cov.nu
    np.testing.assert_allclose(np.sort(nu), np.sort(0.5 / np.sqrt(rep.lam)), rtol=1e-8)


@pytest.mark.parametrize("seed, n", [(0, 1), (1, 2), (2, 3)])
def test_max_volume_beats_random_correlated_states(seed, n):
    A, B = random_quantum_pair(seed, n)
    best, largest, count = max_volume_probe(A, B, seed=seed, trials=100)
    assert count > 0
    assert largest <= best * (1 + 1e-12)
