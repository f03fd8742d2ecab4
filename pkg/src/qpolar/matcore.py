"""Dense real matrix kernel for small phase-space dimensions.

Every public function takes and returns plain ``numpy`` arrays. Symmetric
inputs are symmetrized on entry; asymmetry above the relative tolerance is
rejected instead of being silently repaired.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (
    DimensionMismatch,
    DimensionOdd,
    ExpOverflow,
    NegativeSpectrum,
    NotDiagonalizable,
    NotPositiveDefinite,
    NotSymmetric,
)


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical tolerances shared by all modules.

    Attributes:
        rel_eq: relative tolerance for matrix equality.
        psd_slack: eigenvalue slack for semidefiniteness, relative to the
            spectral norm of the matrix being tested.
        strict_pd_floor: smallest eigenvalue, relative to the spectral norm,
            that still counts as positive definite.
    """

    rel_eq: float = 1e-9
    psd_slack: float = 1e-12
    strict_pd_floor: float = 1e-10

    def __post_init__(self):
        for name in ("rel_eq", "psd_slack", "strict_pd_floor"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def as_dict(self):
        return {
            "rel_eq": self.rel_eq,
            "psd_slack": self.psd_slack,
            "strict_pd_floor": self.strict_pd_floor,
        }


DEFAULT_TOL = TolerancePolicy()


def as_matrix(M, name="matrix"):
    M = np.array(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def as_square(M, name="matrix"):
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def as_symmetric(M, tol=DEFAULT_TOL, name="matrix"):
    """Return ``(M + M.T) / 2`` after checking ``M`` is symmetric to ``tol.rel_eq``."""
    M = as_square(M, name)
    scale = max(1.0, np.max(np.abs(M)))
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > tol.rel_eq * scale:
        raise NotSymmetric(f"{name} is not symmetric (max |M - M^T| = {asym:.3e})")
    return 0.5 * (M + M.T)


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def spectral_norm(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def rel_err(A, B):
    """Frobenius-norm relative error ``|A - B| / max(1, |B|)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return float(np.linalg.norm(A - B) / max(1.0, np.linalg.norm(B)))


def eigh_sym(M):
    """Symmetric eigendecomposition with a reproducible sign convention.

    Eigenvalues come back ascending. Each eigenvector is flipped so its
    largest-magnitude entry is positive.
    """
    w, Q = np.linalg.eigh(symmetrize(M))
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return w, Q * signs


def min_eig(M):
    return float(np.linalg.eigvalsh(symmetrize(M))[0])


def is_psd(M, tol=DEFAULT_TOL):
    M = symmetrize(M)
    return min_eig(M) >= -tol.psd_slack * max(spectral_norm(M), 1e-300)


def is_pd(M, tol=DEFAULT_TOL):
    M = symmetrize(M)
    norm = spectral_norm(M)
    return norm > 0 and min_eig(M) > tol.strict_pd_floor * norm


def require_pd(M, tol=DEFAULT_TOL, name="matrix"):
    """Return the symmetrized ``M`` or raise ``NotPositiveDefinite``.

    The error carries the offending smallest eigenvalue.
    """
    M = as_symmetric(M, tol, name)
    lam = min_eig(M)
    norm = spectral_norm(M)
    if norm == 0 or lam <= tol.strict_pd_floor * norm:
        raise NotPositiveDefinite(
            f"{name} is not positive definite (smallest eigenvalue {lam:.6g}, "
            f"floor {tol.strict_pd_floor * norm:.3g})",
            eigenvalue=lam,
        )
    return M


def half_dim(M):
    d = np.asarray(M).shape[0]
    if d % 2:
        raise DimensionOdd(f"expected an even dimension, got {d}")
    return d // 2


def blocks(M):
    """Split a ``2n x 2n`` matrix into ``(M_XX, M_XP, M_PX, M_PP)``."""
    n = half_dim(M)
    M = np.asarray(M, dtype=float)
    return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]


def from_blocks(XX, XP, PX, PP):
    return np.block([[XX, XP], [PX, PP]])


def schur_complement(M, block="lower", tol=DEFAULT_TOL):
    """Schur complement of one diagonal block in an even-dimensional SPD matrix.

    Args:
        M: symmetric ``2n x 2n`` matrix.
        block: ``"lower"`` inverts ``M_PP`` and returns
            ``M_XX - M_XP M_PP^{-1} M_PX``; ``"upper"`` inverts ``M_XX`` and
            returns ``M_PP - M_PX M_XX^{-1} M_XP``.
        tol: tolerance policy used for the pivot check.

    Returns:
        The symmetrized ``n x n`` complement.
    """
    M = as_symmetric(M, tol)
    XX, XP, PX, PP = blocks(M)
    if block == "lower":
        pivot = require_pd(PP, tol, "M_PP")
        out = XX - XP @ np.linalg.solve(pivot, PX)
    elif block == "upper":
        pivot = require_pd(XX, tol, "M_XX")
        out = PP - PX @ np.linalg.solve(pivot, XP)
    else:
        raise ValueError(f"block must be 'upper' or 'lower', got {block!r}")
    return symmetrize(out)


def loewner_leq(A, B, tol=DEFAULT_TOL):
    """True iff ``A <= B`` in the Loewner order, i.e. ``B - A`` is PSD."""
    A = as_symmetric(A, tol, "A")
    B = as_symmetric(B, tol, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    scale = max(spectral_norm(A), spectral_norm(B), 1e-300)
    return min_eig(B - A) >= -tol.psd_slack * scale


def sym_sqrt(M, tol=DEFAULT_TOL):
    """Symmetric PSD square root of a symmetric PSD matrix."""
    M = as_symmetric(M, tol)
    w, Q = eigh_sym(M)
    slack = tol.psd_slack * max(spectral_norm(M), 1e-300)
    if w[0] < -slack:
        raise NegativeSpectrum(f"matrix has eigenvalue {w[0]:.6g} < 0")
    w = np.clip(w, 0.0, None)
    return symmetrize((Q * np.sqrt(w)) @ Q.T)


def sym_inv_sqrt(M, tol=DEFAULT_TOL):
    M = require_pd(M, tol)
    w, Q = eigh_sym(M)
    return symmetrize((Q / np.sqrt(w)) @ Q.T)


def sym_pow(M, power, tol=DEFAULT_TOL):
    """Real power of an SPD matrix via its eigendecomposition."""
    M = require_pd(M, tol)
    w, Q = eigh_sym(M)
    return symmetrize((Q * w**power) @ Q.T)


def principal_sqrt(M, tol=DEFAULT_TOL):
    """Principal square root ``X`` with ``X @ X = M``.

    Symmetric inputs must be PSD and give a symmetric PSD root. Non-symmetric
    inputs must be diagonalizable with real eigenvalues ``>= -slack``; that
    covers matrices similar to a symmetric PSD matrix, the only non-symmetric
    case the package needs. General real Schur-form roots are not attempted.
    """
    M = as_square(M)
    scale = max(1.0, np.max(np.abs(M)))
    if np.max(np.abs(M - M.T)) <= tol.rel_eq * scale:
        return sym_sqrt(M, tol)

    w, V = np.linalg.eig(M)
    norm = max(spectral_norm(M), 1e-300)
    if np.max(np.abs(w.imag)) > 1e3 * tol.rel_eq * norm:
        raise NotDiagonalizable(f"complex eigenvalues {w[np.abs(w.imag) > 0]}")
    w = w.real
    slack = max(tol.psd_slack * norm, 1e3 * np.finfo(float).eps * norm)
    if w.min() < -slack:
        raise NegativeSpectrum(f"matrix has eigenvalue {w.min():.6g} < 0")
    V = V.real
    if np.linalg.cond(V) > 1e10:
        raise NotDiagonalizable("eigenvector matrix is (numerically) singular")
    X = (V * np.sqrt(np.clip(w, 0.0, None))) @ np.linalg.inv(V)
    if rel_err(X @ X, M) > 1e3 * tol.rel_eq:
        raise NotDiagonalizable("square root failed its X @ X = M check")
    return X


def mat_exp(M, t=1.0):
    """``exp(t M)`` by scaling and squaring (scipy's Pade implementation)."""
    M = as_square(M)
    if t == 0:
        return np.eye(M.shape[0])
    tm = t * M
    if np.linalg.norm(tm, 1) > 1e3:
        raise ExpOverflow(f"|t M| = {np.linalg.norm(tm, 1):.3g} exceeds 1e3")
    return la.expm(tm)


def det_spd(M):
    """Determinant of an SPD matrix through its Cholesky factor."""
    c = np.linalg.cholesky(symmetrize(M))
    return float(np.prod(np.diag(c)) ** 2)
