"""Symplectic group toolkit.

Phase-space vectors are ordered ``z = (x_1..x_n, p_1..p_n)``, so the standard
symplectic matrix is ``J = [[0, I], [-I, 0]]`` and ``S`` is symplectic iff
``S.T @ J @ S == J``.

Williamson convention: ``Sigma = S.T @ diag(nu, nu) @ S``.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as la

from .errors import DimensionMismatch, NotSymplectic, SingularL
from .matcore import (
    DEFAULT_TOL,
    as_square,
    as_symmetric,
    blocks,
    eigh_sym,
    half_dim,
    rel_err,
    require_pd,
    symmetrize,
    sym_inv_sqrt,
    sym_sqrt,
)


def standard_J(n):
    """The ``2n x 2n`` standard symplectic matrix ``[[0, I], [-I, 0]]``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_residual(S):
    """``|S^T J S - J|_F / |S|_2^2``, the scale-free defect from Sp(n)."""
    S = as_square(S)
    J = standard_J(half_dim(S))
    return float(np.linalg.norm(S.T @ J @ S - J) / max(np.linalg.norm(S, 2) ** 2, 1.0))


def is_symplectic(S, tol=DEFAULT_TOL):
    return symplectic_residual(S) <= tol.rel_eq


def certify_symplectic(S, tol=DEFAULT_TOL, what="matrix"):
    """Return ``S`` as an array, raising ``NotSymplectic`` if it is not in Sp(n)."""
    S = as_square(S)
    res = symplectic_residual(S)
    if res > tol.rel_eq:
        raise NotSymplectic(f"{what} is not symplectic (residual {res:.3e})", residual=res)
    return S


def symplectic_inverse(S):
    """``S^{-1} = -J S^T J``; exact for symplectic ``S``."""
    S = np.asarray(S, dtype=float)
    J = standard_J(half_dim(S))
    return -J @ S.T @ J


def vp(P):
    """Shear generator ``V_{-P} = [[I, 0], [P, I]]`` for symmetric ``P``."""
    P = as_symmetric(P, name="P")
    n = P.shape[0]
    return np.block([[np.eye(n), np.zeros((n, n))], [P, np.eye(n)]])


def ml(L, tol=DEFAULT_TOL):
    """Dilation generator ``M_L = [[L^{-1}, 0], [0, L^T]]``."""
    L = as_square(L, "L")
    n = L.shape[0]
    det = np.linalg.det(L)
    scale = max(np.linalg.norm(L, 2), 1e-300) ** n
    if abs(det) <= tol.strict_pd_floor * scale:
        raise SingularL(f"L is singular (det = {det:.3e})")
    zero = np.zeros((n, n))
    return np.block([[np.linalg.inv(L), zero], [zero, L.T]])


def generator(kind, matrix=None, n=None, tol=DEFAULT_TOL):
    """Build one of the generators ``"VP"``, ``"ML"`` or ``"J"`` of Sp(n).

    ``matrix`` is ``P`` for VP and ``L`` for ML; ``J`` needs ``n`` instead.
    """
    kind = kind.upper()
    if kind == "VP":
        S = vp(matrix)
    elif kind == "ML":
        S = ml(matrix, tol)
    elif kind == "J":
        if n is None:
            n = np.asarray(matrix).shape[0] if matrix is not None else 1
        S = standard_J(n)
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return certify_symplectic(S, tol, f"generator {kind}")


def symplectic_eigenvalues(M, tol=DEFAULT_TOL):
    """Symplectic eigenvalues of an SPD ``2n x 2n`` matrix, ascending.

    ``±i nu_j`` are the eigenvalues of ``J M``; they are read off as the
    moduli of the eigenvalues of the skew matrix ``K = M^{1/2} J M^{1/2}``
    via the symmetric matrix ``K^T K``, whose spectrum is ``nu_j^2``, each
    twice.
    """
    M = require_pd(M, tol, "M")
    n = half_dim(M)
    R = sym_sqrt(M, tol)
    K = R @ standard_J(n) @ R
    w = np.sort(np.clip(np.linalg.eigvalsh(symmetrize(K.T @ K)), 0.0, None))
    return np.sqrt(0.5 * (w[0::2] + w[1::2]))


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """``Sigma = S.T @ diag(nu, nu) @ S`` with ``S`` symplectic, ``nu`` ascending."""

    S: np.ndarray
    nu: np.ndarray

    @property
    def D(self):
        return np.diag(np.concatenate([self.nu, self.nu]))

    def reconstruct(self):
        return self.S.T @ self.D @ self.S


def _skew_canonical_frame(K):
    """Orthogonal ``O`` and ``nu`` with ``O.T K O = [[0, diag(nu)], [-diag(nu), 0]]``.

    ``K`` is real skew-symmetric and nonsingular. The real Schur form of a
    normal matrix is block diagonal with 2x2 blocks ``[[0, b], [-b, 0]]``;
    each block yields one canonical pair ``(u, v)`` with ``K v = nu u`` and
    ``K u = -nu v``.
    """
    T, Z = la.schur(K, output="real")
    d = K.shape[0]
    n = d // 2
    pairs = []
    k = 0
    while k < d:
        if k + 1 < d and abs(T[k + 1, k]) > 0:
            b = 0.5 * (T[k, k + 1] - T[k + 1, k])
            u, q2 = Z[:, k], Z[:, k + 1]
            if b > 0:
                v = q2
            else:
                v, b = -q2, -b
            pairs.append((b, u, v))
            k += 2
        else:
            # A split block means a zero eigenvalue: K would be singular.
            raise np.linalg.LinAlgError("skew matrix has a zero eigenvalue")
    if len(pairs) != n:
        raise np.linalg.LinAlgError("unexpected real Schur structure")
    pairs.sort(key=lambda item: item[0])
    U = np.empty((d, n))
    V = np.empty((d, n))
    nu = np.empty(n)
    for j, (b, u, v) in enumerate(pairs):
        first = np.flatnonzero(np.abs(u) > 1e-12 * np.max(np.abs(u)))[0]
        if u[first] < 0:
            u, v = -u, -v
        U[:, j], V[:, j], nu[j] = u, v, b
    return np.hstack([U, V]), nu


def williamson(Sigma, tol=DEFAULT_TOL):
    """Williamson normal form of an SPD matrix.

    Args:
        Sigma: symmetric positive definite ``2n x 2n`` matrix.
        tol: tolerance policy; the result is verified against it.

    Returns:
        WilliamsonDecomposition with ``Sigma = S^T diag(nu, nu) S``.
    """
    Sigma = require_pd(Sigma, tol, "Sigma")
    n = half_dim(Sigma)
    R = sym_sqrt(Sigma, tol)
    K = R @ standard_J(n) @ R
    O, nu = _skew_canonical_frame(0.5 * (K - K.T))
    d_inv_sqrt = np.concatenate([nu, nu]) ** -0.5
    S = (d_inv_sqrt[:, None] * O.T) @ R
    S = certify_symplectic(S, _loose(tol), "Williamson factor")
    dec = WilliamsonDecomposition(S=S, nu=nu)
    err = rel_err(dec.reconstruct(), Sigma)
    if err > 1e3 * tol.rel_eq:
        raise NotSymplectic(f"Williamson reconstruction error {err:.3e}", residual=err)
    return dec


@dataclass(frozen=True)
class BalancedDiag:
    """``L^T A L = L^{-1} B L^{-T} = diag(sqrt(lam))``, ``lam`` ascending."""

    L: np.ndarray
    lam: np.ndarray

    @property
    def Lambda(self):
        return np.diag(np.sqrt(self.lam))


def balanced_diagonalize(A, B, tol=DEFAULT_TOL):
    """Simultaneous balanced diagonalization of two SPD matrices.

    The ``lam`` are the eigenvalues of ``A @ B``, obtained from the symmetric
    similar matrix ``A^{1/2} B A^{1/2} = U diag(lam) U^T``; then
    ``L = A^{-1/2} U diag(lam^{1/4})``.
    """
    A = require_pd(A, tol, "A")
    B = require_pd(B, tol, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}")
    Ah = sym_sqrt(A, tol)
    lam, U = eigh_sym(Ah @ B @ Ah)
    L = sym_inv_sqrt(A, tol) @ U * lam**0.25
    return BalancedDiag(L=L, lam=lam)


@dataclass(frozen=True)
class BlockCheckReport:
    ok: bool
    abcd1: float
    abcd2_x: float
    abcd2_p: float
    sjs: float

    def __bool__(self):
        return self.ok


def block_symplectic_check(M, tol=DEFAULT_TOL):
    """Check the block relations characterising symplectic matrices.

    ``M_XX^T M_PP - M_PX^T M_XP = I`` and symmetry of ``M_XX^T M_PX`` and
    ``M_XP^T M_PP``. The ``S^T J S`` residual is reported alongside.
    """
    M = as_square(M)
    XX, XP, PX, PP = blocks(M)
    n = XX.shape[0]
    scale = max(np.linalg.norm(M, 2) ** 2, 1.0)
    r1 = np.linalg.norm(XX.T @ PP - PX.T @ XP - np.eye(n)) / scale
    c = XX.T @ PX
    r2 = np.linalg.norm(c - c.T) / scale
    c = XP.T @ PP
    r3 = np.linalg.norm(c - c.T) / scale
    ok = max(r1, r2, r3) <= tol.rel_eq
    return BlockCheckReport(ok=bool(ok), abcd1=r1, abcd2_x=r2, abcd2_p=r3,
                            sjs=symplectic_residual(M))


def random_symplectic(seed, n, spread=0.5):
    """Seeded random element of Sp(n) built from 3 to 8 generator factors.

    Factors are drawn among ``V_{-P}`` (``P`` symmetric Gaussian times
    ``spread``), ``M_L`` (``L = exp(spread * G)``) and ``J``.
    """
    if spread < 0:
        raise ValueError("spread must be non-negative")
    if spread == 0:
        return np.eye(2 * n)
    rng = np.random.default_rng(seed)
    S = np.eye(2 * n)
    for _ in range(int(rng.integers(3, 9))):
        kind = int(rng.integers(0, 3))
        if kind == 0:
            G = rng.standard_normal((n, n))
            S = vp(spread * symmetrize(G)) @ S
        elif kind == 1:
            G = rng.standard_normal((n, n))
            S = ml(la.expm(spread * G)) @ S
        else:
            S = standard_J(n) @ S
    return S


def _loose(tol):
    # Williamson factors inherit the conditioning of Sigma^{1/2}.
    return replace(tol, rel_eq=max(tol.rel_eq, 1e-8))


__all__ = [
    "BalancedDiag",
    "BlockCheckReport",
    "WilliamsonDecomposition",
    "balanced_diagonalize",
    "block_symplectic_check",
    "certify_symplectic",
    "generator",
    "is_symplectic",
    "ml",
    "random_symplectic",
    "standard_J",
    "symplectic_eigenvalues",
    "symplectic_inverse",
    "symplectic_residual",
    "vp",
    "williamson",
]
