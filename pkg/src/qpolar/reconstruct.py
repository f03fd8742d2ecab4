"""Reconstruction of Gaussian states from their position and momentum shadows.

Given ellipsoids ``X = {A x.x <= hbar}`` and ``P = {B p.p <= hbar}``, a
covariance matrix whose ellipsoid projects onto ``X`` and ``P`` must have
``Sigma_XX = (hbar/2) A^{-1}`` and ``Sigma_PP = (hbar/2) B^{-1}``; only the
correlation block ``Sigma_XP`` is left to choose. Every solver below checks
its own output (reprojection, purity, block identities) before returning.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import NotQuantumPair, SubHeisenberg, VerificationFailed
from .gaussian import (
    CovState,
    GaussianMixed,
    GaussianPure,
    is_quantum_blob,
    project,
    purity,
    wy_from_sigma,
)
from .matcore import (
    DEFAULT_TOL,
    as_symmetric,
    eigh_sym,
    from_blocks,
    rel_err,
    require_pd,
    sym_inv_sqrt,
    sym_sqrt,
    symmetrize,
)
from .polarity import pair_report
from .symplectic import balanced_diagonalize, ml, symplectic_residual

# Verification residuals may exceed rel_eq by this factor before a solver fails.
VERIFY_FACTOR = 10.0

UNIQUE = "Unique"
SIGN_PAIR = "SignPair"


@dataclass(frozen=True)
class PauliSolution:
    """Pure Gaussian states sharing the same position and momentum shadows.

    Attributes:
        partners: one ``GaussianPure`` (unique case) or two.
        blob_sigmas: the matching covariance states.
        ambiguity: ``"Unique"`` or ``"SignPair"``.
        rank: rank of the correlation block ``Sigma_XP``.
        residuals: verification residuals by name.
        notes: discrepancy flags attached by the solver.
    """

    partners: tuple
    blob_sigmas: tuple
    ambiguity: str
    rank: int = 0
    residuals: dict = field(default_factory=dict)
    notes: tuple = ()


def _verify(name, value, tol, residuals):
    residuals[name] = float(value)
    if value > VERIFY_FACTOR * tol.rel_eq:
        raise VerificationFailed(f"{name} residual {value:.3e} exceeds tolerance", residual=value)


def shadow_residuals(cov, A, B):
    """Relative errors between the shadows of ``cov`` and the targets ``A``, ``B``."""
    OX, OP = project(cov.ellipsoid(), cov.tol)
    return rel_err(OX.A, A), rel_err(OP.A, B)


def pure_identity_residual(cov):
    """Residual of ``Sigma_XX Sigma_PP - Sigma_XP^2 = (hbar/2)^2 I``."""
    XX, XP, _, PP = cov.blocks
    return rel_err(XX @ PP - XP @ XP, (cov.hbar / 2) ** 2 * np.eye(cov.n))


def _check_blob(cov, A, B, tag, residuals):
    tol = cov.tol
    rx, rp = shadow_residuals(cov, A, B)
    _verify(f"{tag}.reprojection_x", rx, tol, residuals)
    _verify(f"{tag}.reprojection_p", rp, tol, residuals)
    _verify(f"{tag}.symplectic_M", symplectic_residual(cov.M), tol, residuals)
    _verify(f"{tag}.pure_identity", pure_identity_residual(cov), tol, residuals)
    _verify(f"{tag}.purity", abs(purity(cov) - 1.0), tol, residuals)


def pauli_1d(sigma_xx, sigma_pp, hbar=1.0, tol=DEFAULT_TOL):
    """The one-dimensional Pauli problem.

    Args:
        sigma_xx: position variance.
        sigma_pp: momentum variance.
        hbar: action unit.
        tol: tolerance policy.

    Returns:
        PauliSolution with partners ``W = hbar / (2 sigma_xx)``,
        ``Y = -+ sigma_xp / sigma_xx`` where
        ``sigma_xp = +- sqrt(sigma_xx sigma_pp - hbar^2 / 4)``.

    Raises:
        SubHeisenberg: ``sigma_xx sigma_pp < hbar^2 / 4``.
    """
    if sigma_xx <= 0 or sigma_pp <= 0:
        raise ValueError("variances must be positive")
    prod = sigma_xx * sigma_pp
    D = prod - hbar**2 / 4
    if D < -tol.rel_eq * prod:
        raise SubHeisenberg(
            f"sigma_xx * sigma_pp = {prod:.6g} < hbar^2/4 = {hbar**2 / 4:.6g}"
        )
    unique = D <= tol.rel_eq * prod
    sxp = 0.0 if unique else float(np.sqrt(D))
    signs = (1.0,) if unique else (1.0, -1.0)
    partners, sigmas, residuals = [], [], {}
    for s in signs:
        cov = CovState(np.array([[sigma_xx, s * sxp], [s * sxp, sigma_pp]]), hbar, tol)
        tag = "plus" if s > 0 else "minus"
        _check_blob(cov, [[hbar / (2 * sigma_xx)]], [[hbar / (2 * sigma_pp)]], tag, residuals)
        partners.append(GaussianPure([[hbar / (2 * sigma_xx)]], [[-s * sxp / sigma_xx]], hbar))
        sigmas.append(cov)
    return PauliSolution(tuple(partners), tuple(sigmas), UNIQUE if unique else SIGN_PAIR,
                         rank=0 if unique else 1, residuals=residuals)


def reconstruct_saturated(A, hbar=1.0, tol=DEFAULT_TOL):
    """The unique blob whose shadows are ``X = {A x.x <= hbar}`` and ``X^hbar``.

    ``Sigma = (hbar/2) diag(A^{-1}, A)``, i.e. the state ``W = A``, ``Y = 0``.
    """
    A = require_pd(A, tol, "A")
    Ai = symmetrize(np.linalg.inv(A))
    zero = np.zeros_like(A)
    cov = CovState(0.5 * hbar * from_blocks(Ai, zero, zero, A), hbar, tol)
    residuals = {}
    _check_blob(cov, A, Ai, "blob", residuals)
    if not is_quantum_blob(cov):
        raise VerificationFailed("reconstructed state is not a quantum blob")
    return PauliSolution((GaussianPure(A, zero, hbar),), (cov,), UNIQUE, 0, residuals)


def _require_pair(A, B, tol):
    rep = pair_report(A, B, tol)
    if not rep.is_pair:
        raise NotQuantumPair(
            f"largest eigenvalue of A B is {rep.lam[0]:.6g} > 1; witness {rep.witness}"
        )
    if rep.lam[-1] <= 0:
        raise NotQuantumPair("A B has a non-positive eigenvalue")
    return rep


def correlation_root(A, B, tol=DEFAULT_TOL):
    """``C = A^{-1/2} K^{1/2} A^{1/2}`` with ``K = A^{-1/2} B^{-1} A^{-1/2} - I``.

    ``C`` is a square root of ``A^{-1} B^{-1} - I`` (similar to ``K``), and
    ``A C = A^{1/2} K^{1/2} A^{1/2}`` is symmetric, which is what makes the
    resulting ``Y`` symmetric.

    Returns:
        ``(C, K_eigenvalues)``.
    """
    Ahi = sym_inv_sqrt(A, tol)
    Ah = sym_sqrt(A, tol)
    K = symmetrize(Ahi @ np.linalg.inv(B) @ Ahi) - np.eye(A.shape[0])
    k, Q = eigh_sym(K)
    scale = max(1.0, float(np.max(np.abs(k))))
    if k[0] < -VERIFY_FACTOR * tol.rel_eq * scale:
        raise NotQuantumPair(f"A^-1/2 B^-1 A^-1/2 - I has eigenvalue {k[0]:.3e} < 0")
    k = np.clip(k, 0.0, None)
    Kh = (Q * np.sqrt(k)) @ Q.T
    return Ahi @ Kh @ Ah, k


def reconstruct_pair(A, B, hbar=1.0, tol=DEFAULT_TOL):
    """The two blobs (Pauli partners) whose shadows are ``X`` and ``P``.

    ``Sigma_XX = (hbar/2) A^{-1}``, ``Sigma_PP = (hbar/2) B^{-1}`` and
    ``Sigma_XP = +-(hbar/2) A^{-1/2} K^{1/2} A^{1/2}`` (see
    :func:`correlation_root`). Both covariance matrices are verified for
    reprojection, purity and the block identity
    ``Sigma_XX Sigma_PP - Sigma_XP^2 = (hbar/2)^2 I``.

    Raises:
        NotQuantumPair: some eigenvalue of ``A B`` exceeds one.
        VerificationFailed: a verification residual exceeds tolerance.
    """
    A = require_pd(A, tol, "A")
    B = require_pd(B, tol, "B")
    _require_pair(A, B, tol)
    C, k = correlation_root(A, B, tol)
    rank = int(np.sum(k > VERIFY_FACTOR * tol.rel_eq * max(1.0, float(k.max()))))
    h2 = hbar / 2
    XX = h2 * symmetrize(np.linalg.inv(A))
    PP = h2 * symmetrize(np.linalg.inv(B))
    signs = (1.0,) if rank == 0 else (1.0, -1.0)
    partners, sigmas, residuals = [], [], {}
    for s in signs:
        XP = s * h2 * C
        cov = CovState(symmetrize(from_blocks(XX, XP, XP.T, PP)), hbar, tol)
        _check_blob(cov, A, B, "plus" if s > 0 else "minus", residuals)
        partners.append(wy_from_sigma(cov))
        sigmas.append(cov)
    return PauliSolution(tuple(partners), tuple(sigmas), UNIQUE if rank == 0 else SIGN_PAIR,
                         rank, residuals)


@dataclass(frozen=True)
class MaxVolumeReport:
    """Largest covariance ellipsoid inside ``X x P`` and its purity bookkeeping.

    Attributes:
        state: the mixed state.
        lam: eigenvalues of ``A B``, ascending.
        purity: ``(hbar/2)^n (det Sigma)^{-1/2}``.
        purity_nu: ``prod_j (hbar/2) / nu_j``.
        alternatives: purity values from other candidate exponents,
            ``prod lam^2``, ``prod lam`` and ``prod lam^{1/4}``.
        discrepancy: whether any alternative differs from ``purity``.
        residuals: verification residuals.
    """

    state: GaussianMixed
    lam: np.ndarray
    purity: float
    purity_nu: float
    alternatives: dict
    discrepancy: bool
    residuals: dict


def max_volume_state(A, B, hbar=1.0, tol=DEFAULT_TOL):
    """Mixed state of largest covariance volume with shadows ``X`` and ``P``.

    In the frame of :func:`balanced_diagonalize` (``L^T A L = L^{-1} B L^{-T}
    = Lambda = diag(sqrt(lam))``) the shadows are ``{Lambda x.x <= hbar}`` and
    ``{Lambda p.p <= hbar}``. The largest ellipsoid with these shadows is the
    product-shaped ``{Lambda x.x + Lambda p.p <= hbar}``, whose covariance is
    ``(hbar/2) diag(Lambda^{-1}, Lambda^{-1})``. Mapping back with
    ``diag(L, L^{-T})`` gives ``Sigma = (hbar/2) diag(A^{-1}, B^{-1})``,
    which is checked. The symplectic eigenvalues are
    ``nu_j = (hbar/2) lam_j^{-1/2}``, so the purity is ``prod_j lam_j^{1/2}``.
    """
    A = require_pd(A, tol, "A")
    B = require_pd(B, tol, "B")
    _require_pair(A, B, tol)
    bd = balanced_diagonalize(A, B, tol)
    lam = bd.lam
    Li = np.diag(1.0 / np.sqrt(lam))
    zero = np.zeros_like(Li)
    sigma_reduced = 0.5 * hbar * from_blocks(Li, zero, zero, Li)
    T = ml(np.linalg.inv(bd.L), tol)
    cov = CovState(symmetrize(T @ sigma_reduced @ T.T), hbar, tol)
    residuals = {}
    direct = 0.5 * hbar * from_blocks(np.linalg.inv(A), zero, zero, np.linalg.inv(B))
    _verify("frame_route_vs_direct", rel_err(cov.sigma, direct), tol, residuals)
    rx, rp = shadow_residuals(cov, A, B)
    _verify("reprojection_x", rx, tol, residuals)
    _verify("reprojection_p", rp, tol, residuals)
    mu = purity(cov)
    mu_nu = float(np.prod((hbar / 2) / cov.nu))
    _verify("purity_vs_nu", abs(mu - mu_nu), tol, residuals)
    alternatives = {
        "prod_lambda_squared": float(np.prod(lam**2)),
        "prod_lambda": float(np.prod(lam)),
        "prod_lambda_quarter": float(np.prod(lam**0.25)),
    }
    discrepancy = any(abs(v - mu) > VERIFY_FACTOR * tol.rel_eq for v in alternatives.values())
    return MaxVolumeReport(GaussianMixed(cov), lam, mu, mu_nu, alternatives, discrepancy,
                           residuals)


def _pure_from_params(theta, n, hbar):
    iu = np.triu_indices(n)
    m = len(iu[0])
    R = np.zeros((n, n))
    R[iu] = theta[:m]
    W = R.T @ R
    Y = np.zeros((n, n))
    Y[iu] = theta[m:]
    Y = Y + np.triu(Y, 1).T
    return W, Y


def uniqueness_probe(A, hbar=1.0, seed=0, trials=200, tol=DEFAULT_TOL):
    """Search for blobs with shadows ``X`` and ``X^hbar`` from random starts.

    A blob ``phi_WY`` has position shadow ``{W x.x <= hbar}`` and momentum
    shadow ``{(W + Y W^{-1} Y)^{-1} p.p <= hbar}``. Each trial starts at a
    random ``(W, Y)`` (``W = R^T R``) and drives the shadow mismatch to zero
    with a least-squares solver. The momentum mismatch is measured through
    the factor ``F = W^{-1/2} Y`` of the excess ``Y W^{-1} Y = F^T F``:
    the excess itself is even in ``Y`` and would cap the attainable
    accuracy at the square root of machine precision.

    Returns:
        ``(converged, max_deviation)``: number of trials whose residual fell
        below ``1e-12`` and the largest ``rel_err`` of their covariance
        matrices from :func:`reconstruct_saturated`.
    """
    A = require_pd(A, tol, "A")
    n = A.shape[0]
    ref = reconstruct_saturated(A, hbar, tol).blob_sigmas[0].sigma
    rng = np.random.default_rng(seed)
    m = n * (n + 1) // 2

    def residual(theta):
        W, Y = _pure_from_params(theta, n, hbar)
        F = sym_inv_sqrt(W) @ Y
        return np.concatenate([(W - A).ravel(), F.ravel()])

    converged, worst = 0, 0.0
    for _ in range(trials):
        R0 = np.triu(rng.standard_normal((n, n))) + 2 * np.eye(n)
        theta0 = np.concatenate([R0[np.triu_indices(n)], rng.standard_normal(m)])
        sol = least_squares(residual, theta0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.linalg.norm(sol.fun) > 1e-12:
            continue
        W, Y = _pure_from_params(sol.x, n, hbar)
        Wi = np.linalg.inv(W)
        sigma = 0.5 * hbar * from_blocks(Wi, -Wi @ Y, -Y @ Wi, W + Y @ Wi @ Y)
        converged += 1
        worst = max(worst, rel_err(sigma, ref))
    return converged, worst


def max_volume_probe(A, B, hbar=1.0, seed=0, trials=200, tol=DEFAULT_TOL):
    """Compare ``det Sigma`` of random quantum states with shadows ``X``, ``P``.

    Candidates keep the diagonal blocks fixed and draw a random correlation
    block ``Sigma_XP``, halved until the state is positive definite and
    satisfies the quantum condition.

    Returns:
        ``(det_max_volume, largest_candidate_det, candidates)``.
    """
    A = as_symmetric(A, tol, "A")
    B = as_symmetric(B, tol, "B")
    n = A.shape[0]
    rep = max_volume_state(A, B, hbar, tol)
    best = float(np.linalg.det(rep.state.cov.sigma))
    XX = 0.5 * hbar * np.linalg.inv(A)
    PP = 0.5 * hbar * np.linalg.inv(B)
    rng = np.random.default_rng(seed)
    largest, count = 0.0, 0
    for _ in range(trials):
        C = rng.standard_normal((n, n)) * np.sqrt(np.linalg.norm(XX, 2) * np.linalg.norm(PP, 2))
        for _ in range(60):
            sigma = symmetrize(from_blocks(XX, C, C.T, PP))
            if np.linalg.eigvalsh(sigma)[0] > 0:
                cov = CovState(sigma, hbar, tol)
                if cov.is_quantum:
                    rx, rp = shadow_residuals(cov, A, B)
                    if max(rx, rp) <= VERIFY_FACTOR * tol.rel_eq:
                        largest = max(largest, float(np.linalg.det(sigma)))
                        count += 1
                    break
            C = 0.5 * C
    return best, largest, count


__all__ = [
    "MaxVolumeReport",
    "PauliSolution",
    "SIGN_PAIR",
    "UNIQUE",
    "correlation_root",
    "max_volume_probe",
    "max_volume_state",
    "pauli_1d",
    "pure_identity_residual",
    "reconstruct_pair",
    "reconstruct_saturated",
    "shadow_residuals",
    "uniqueness_probe",
]
