import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import dims, seeds, spd
from qpolar.dynamics import (
    QuadHamiltonian,
    Schedule,
    evolve_cov,
    flow,
    flow_schedule,
    projection_volume_series,
)
from qpolar.errors import ExpOverflow, NotSymmetric, QuantumConditionViolated
from qpolar.gaussian import CovState, purity, random_cov_state
from qpolar.symplectic import symplectic_residual

times = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


@pytest.mark.parametrize("t", [0.0, 0.5, 2.0, -1.0])
@pytest.mark.parametrize("mass", [1.0, 2.5])
def test_free_particle_flow_is_shear(t, mass):
    S = flow(QuadHamiltonian.free_particle(1, mass), t)
    np.testing.assert_allclose(S, [[1.0, t / mass], [0.0, 1.0]], atol=1e-15)


@pytest.mark.parametrize("t", [0.3, np.pi / 2, np.pi, 5.0])
def test_oscillator_flow_is_rotation(t):
    # dx/dt = p and dp/dt = -x.
    S = flow(QuadHamiltonian.oscillator(1), t)
    c, s = np.cos(t), np.sin(t)
    np.testing.assert_allclose(S, [[c, s], [-s, c]], atol=1e-14)


def test_oscillator_flow_is_periodic():
    S = flow(QuadHamiltonian.oscillator(2), 2 * np.pi)
    np.testing.assert_allclose(S, np.eye(4), atol=1e-13)


@given(seeds, dims, times)
def test_flow_is_symplectic_and_a_group(seed, n, t):
    H = QuadHamiltonian(spd(seed, 2 * n))
    S = flow(H, t)
    assert symplectic_residual(S) < 1e-10
    both = flow(H, t) @ flow(H, 0.5)
    assert np.abs(both - flow(H, t + 0.5)).max() <= 1e-9 * max(1.0, np.abs(both).max())


def test_schedule_applies_segments_in_order():
    kick = QuadHamiltonian(np.diag([1.0, 0.0]))
    drift = QuadHamiltonian.free_particle(1)
    S = flow_schedule(Schedule(((kick, 1.0), (drift, 1.0))))
    np.testing.assert_allclose(S, [[1.0, 1.0], [0.0, 1.0]] @ np.array([[1.0, 0.0], [-1.0, 1.0]]),
                               atol=1e-15)


def test_schedule_validation():
    H1 = QuadHamiltonian.oscillator(1)
    H2 = QuadHamiltonian.oscillator(2)
    with pytest.raises(ValueError):
        Schedule(((H1, -1.0),))
    with pytest.raises(ValueError):
        Schedule(((H1, 1.0), (H2, 1.0)))
    with pytest.raises(TypeError):
        Schedule(((np.eye(2), 1.0),))
    with pytest.raises(ValueError):
        flow_schedule(Schedule(()))


def test_hamiltonian_must_be_symmetric():
    with pytest.raises(NotSymmetric):
        QuadHamiltonian(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_flow_rejects_overflowing_exponent():
    with pytest.raises(ExpOverflow):
        flow(QuadHamiltonian(np.diag([1.0, 1e4])), 1.0)
    with pytest.raises(ValueError):
        flow(QuadHamiltonian.oscillator(1), np.inf)


@given(seeds, dims, times)
def test_evolution_preserves_purity_and_verdict(seed, n, t):
    cov = random_cov_state(seed, n, kind="mixed")
    H = QuadHamiltonian(spd(seed + 1, 2 * n))
    out = evolve_cov(cov, H, t)
    assert out.is_quantum == cov.is_quantum
    floor = np.finfo(float).eps * np.linalg.cond(out.sigma)
    assert purity(out) == pytest.approx(purity(cov), rel=max(1e-9, 10 * floor))


def test_free_particle_position_shadow_spreads():
    cov = CovState(0.5 * np.eye(2))
    grid = [0.0, 1.0, 2.0, 3.0]
    pts = projection_volume_series(cov, QuadHamiltonian.free_particle(1), grid)
    for pt, t in zip(pts, grid):
        assert pt.vol_x == pytest.approx(2 * np.sqrt(1 + t * t), rel=1e-12)
        assert pt.vol_p == pytest.approx(2.0, rel=1e-12)
        assert pt.pair.is_pair
        assert pt.det_identity < 1e-12


@given(seeds, dims)
def test_volume_series_keeps_dual_pair_and_det_identity(seed, n):
    cov = random_cov_state(seed, n, kind="blob")
    H = QuadHamiltonian(spd(seed + 1, 2 * n))
    for pt in projection_volume_series(cov, H, np.linspace(0, 2, 5)):
        assert pt.pair.is_pair
        assert pt.det_identity < 1e-8


def test_volume_series_rejects_bad_grid_and_classical_state():
    cov = CovState(0.5 * np.eye(2))
    H = QuadHamiltonian.oscillator(1)
    with pytest.raises(ValueError):
        projection_volume_series(cov, H, [1.0, 0.0])
    with pytest.raises(QuantumConditionViolated):
        projection_volume_series(CovState(0.1 * np.eye(2)), H, [0.0])
