"""Linear Hamiltonian flows and the evolution of covariance ellipsoids.

For ``H(z) = H'' z.z / 2`` the equations of motion ``dz/dt = J H'' z`` have
the flow ``S_t = exp(t J H'')``, which is symplectic. Covariance matrices move
as ``Sigma_t = S_t Sigma S_t^T``.
"""

from dataclasses import dataclass, replace
from math import gamma, pi

import numpy as np

from .errors import VerificationFailed
from .gaussian import CovState, project, projection_pair_check
from .matcore import DEFAULT_TOL, as_symmetric, blocks, det_spd, half_dim, mat_exp, symmetrize
from .symplectic import certify_symplectic, standard_J


@dataclass(frozen=True)
class QuadHamiltonian:
    """``H(z) = hess z.z / 2`` on ``R^{2n}``."""

    hess: np.ndarray

    def __post_init__(self):
        hess = as_symmetric(self.hess, name="Hessian")
        half_dim(hess)
        object.__setattr__(self, "hess", hess)

    @property
    def n(self):
        return self.hess.shape[0] // 2

    @classmethod
    def oscillator(cls, n=1):
        return cls(np.eye(2 * n))

    @classmethod
    def free_particle(cls, n=1, mass=1.0):
        return cls(np.diag(np.concatenate([np.zeros(n), np.full(n, 1.0 / mass)])))


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant Hamiltonian: ``(H, duration)`` segments applied in order."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((H, float(d)) for H, d in self.segments)
        for H, d in segs:
            if not isinstance(H, QuadHamiltonian):
                raise TypeError("segments must hold QuadHamiltonian values")
            if not (np.isfinite(d) and d >= 0):
                raise ValueError(f"durations must be finite and non-negative, got {d}")
        if len({H.n for H, _ in segs}) > 1:
            raise ValueError("all segments must act on the same phase space")
        object.__setattr__(self, "segments", segs)


def _flow_tol(tol):
    # exp(t J H'') loses a few digits to scaling and squaring.
    return replace(tol, rel_eq=max(tol.rel_eq, 1e-8))


def flow(H, t, tol=DEFAULT_TOL):
    """``S_t = exp(t J H'')``, certified symplectic."""
    if not np.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    S = mat_exp(standard_J(H.n) @ H.hess, t)
    return certify_symplectic(S, _flow_tol(tol), f"flow at t = {t}")


def flow_schedule(sched, tol=DEFAULT_TOL):
    """Ordered product ``S_k ... S_1`` of the segment flows."""
    if not sched.segments:
        raise ValueError("empty schedule")
    S = np.eye(2 * sched.segments[0][0].n)
    for H, d in sched.segments:
        S = flow(H, d, tol) @ S
    return certify_symplectic(S, _flow_tol(tol), "scheduled flow")


def evolve_cov(cov, H, t):
    """``Sigma_t = S_t Sigma S_t^T``; the quantum verdict must not change."""
    S = flow(H, t, cov.tol)
    out = CovState(symmetrize(S @ cov.sigma @ S.T), cov.hbar, cov.tol)
    if out.is_quantum != cov.is_quantum:
        raise VerificationFailed(f"quantum verdict changed under the flow at t = {t}")
    return out


@dataclass(frozen=True)
class VolumePoint:
    """Projection volumes of the evolved covariance ellipsoid at one time.

    Attributes:
        t: time.
        vol_x: volume of the position shadow ``{(M_t/M_t,PP) x.x <= hbar}``.
        vol_p: volume of the momentum shadow ``{(M_t/M_t,XX) p.p <= hbar}``.
        pair: dual-pair report of the two shadows.
        det_identity: relative residual of
            ``det(M_t/M_t,PP) = det M_t / det M_t,PP`` (and the momentum
            analogue), whichever is larger.
    """

    t: float
    vol_x: float
    vol_p: float
    pair: object
    det_identity: float


def _ball_factor(n, hbar):
    return (pi * hbar) ** (n / 2) / gamma(n / 2 + 1)


def projection_volume_series(cov, H, t_grid):
    """Shadow volumes and dual-pair certificates along the flow.

    Args:
        cov: initial covariance state (quantum, for the pair certificate).
        H: quadratic Hamiltonian.
        t_grid: finite, ascending times.

    Returns:
        list of VolumePoint.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.all(np.isfinite(t_grid)) or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be finite and ascending")
    n = cov.n
    k = _ball_factor(n, cov.hbar)
    out = []
    for t in t_grid:
        ct = evolve_cov(cov, H, float(t))
        M = ct.M
        OX, OP = project(ct.ellipsoid(), ct.tol)
        det_m = det_spd(M)
        XX, _, _, PP = blocks(M)
        dx = det_spd(OX.A)
        dp = det_spd(OP.A)
        resid = max(abs(dx - det_m / det_spd(PP)) / dx, abs(dp - det_m / det_spd(XX)) / dp)
        out.append(VolumePoint(float(t), k / np.sqrt(dx), k / np.sqrt(dp),
                               projection_pair_check(ct), float(resid)))
    return out


__all__ = [
    "QuadHamiltonian",
    "Schedule",
    "VolumePoint",
    "evolve_cov",
    "flow",
    "flow_schedule",
    "projection_volume_series",
]
