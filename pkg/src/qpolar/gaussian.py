"""Centered Gaussian states: covariance matrices, parameters and Wigner data.

A covariance matrix ``Sigma`` (``2n x 2n``) determines the covariance
ellipsoid ``{z : M z.z <= hbar}`` with ``M = (hbar/2) Sigma^{-1}``. A pure
Gaussian ``phi_WY(x) ~ exp(-(W + iY) x.x / 2 hbar)`` has Wigner function
``~ exp(-G z.z / hbar)`` with the symplectic matrix

    G = [[W + Y W^{-1} Y, Y W^{-1}], [W^{-1} Y, W^{-1}]].

Global phases are not tracked: everything here is determined by ``|psi|``
and the Wigner function.
"""

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotPure,
    QuantumConditionViolated,
    ResidualTooLarge,
)
from .matcore import (
    DEFAULT_TOL,
    TolerancePolicy,
    as_symmetric,
    blocks,
    det_spd,
    from_blocks,
    half_dim,
    rel_err,
    require_pd,
    schur_complement,
    sym_inv_sqrt,
    sym_sqrt,
    symmetrize,
)
from .polarity import EllipsoidBody, Space, pair_report
from .symplectic import (
    certify_symplectic,
    ml,
    random_symplectic,
    standard_J,
    symplectic_eigenvalues,
    vp,
    williamson,
)


def _quantum_slack(hbar, tol):
    return tol.rel_eq * hbar / 2


@dataclass(frozen=True)
class CovState:
    """Covariance matrix of a centered state.

    Attributes:
        sigma: symmetric positive definite ``2n x 2n`` matrix.
        hbar: the action unit.
        nu: symplectic eigenvalues of ``sigma``, ascending (computed).
    """

    sigma: np.ndarray
    hbar: float = 1.0
    tol: TolerancePolicy = field(default=DEFAULT_TOL, repr=False, compare=False)
    nu: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        sigma = require_pd(self.sigma, self.tol, "Sigma")
        half_dim(sigma)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "hbar", float(self.hbar))
        object.__setattr__(self, "nu", symplectic_eigenvalues(sigma, self.tol))

    @property
    def n(self):
        return self.sigma.shape[0] // 2

    @property
    def is_quantum(self):
        return bool(self.nu[0] >= self.hbar / 2 - _quantum_slack(self.hbar, self.tol))

    @property
    def blocks(self):
        """``(Sigma_XX, Sigma_XP, Sigma_PX, Sigma_PP)``."""
        return blocks(self.sigma)

    @property
    def M(self):
        return symmetrize(0.5 * self.hbar * np.linalg.inv(self.sigma))

    def ellipsoid(self):
        return PhaseEllipsoid(self.M, self.hbar)

    def transformed(self, S):
        """The state ``S Sigma S^T`` pushed forward by a linear map."""
        S = np.asarray(S, dtype=float)
        return CovState(symmetrize(S @ self.sigma @ S.T), self.hbar, self.tol)


@dataclass(frozen=True)
class PhaseEllipsoid:
    """The phase-space ellipsoid ``{z : M z.z <= hbar}``."""

    M: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        M = require_pd(self.M, name="M")
        half_dim(M)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def n(self):
        return self.M.shape[0] // 2

    def covariance(self, tol=DEFAULT_TOL):
        return CovState(symmetrize(0.5 * self.hbar * np.linalg.inv(self.M)), self.hbar, tol)

    def body(self):
        return EllipsoidBody(Space.PHASE, self.M, self.hbar)


@dataclass(frozen=True)
class GaussianPure:
    """Parameters ``(W, Y)`` of ``phi_WY(x) ~ exp(-(W + iY) x.x / 2 hbar)``."""

    W: np.ndarray
    Y: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        W = require_pd(self.W, name="W")
        Y = as_symmetric(self.Y, name="Y")
        if W.shape != Y.shape:
            raise DimensionMismatch(f"W is {W.shape}, Y is {Y.shape}")
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def standard(cls, n, hbar=1.0):
        """The standard Gaussian ``phi_0``: ``W = I``, ``Y = 0``."""
        return cls(np.eye(n), np.zeros((n, n)), hbar)

    @property
    def n(self):
        return self.W.shape[0]


@dataclass(frozen=True)
class GaussianMixed:
    """A Gaussian state known through its covariance matrix."""

    cov: CovState

    @property
    def purity(self):
        return purity(self.cov)

    @property
    def hbar(self):
        return self.cov.hbar


@dataclass(frozen=True)
class QuantumVerdict:
    holds: bool
    nu_min: float
    margin: float

    def as_dict(self):
        return {"holds": self.holds, "nu_min": self.nu_min, "margin": self.margin}


def quantum_condition(cov):
    """Check ``Sigma + (i hbar / 2) J >= 0`` through ``nu_min >= hbar / 2``.

    The slack is ``rel_eq * hbar / 2``. No complex eigenproblem is solved.
    """
    nu_min = float(cov.nu[0])
    return QuantumVerdict(cov.is_quantum, nu_min, nu_min - cov.hbar / 2)


def rsup_check(cov, j):
    """Robertson-Schroedinger inequality for mode ``j`` (1-based)."""
    n = cov.n
    if not 1 <= j <= n:
        raise IndexOutOfRange(f"mode index {j} outside 1..{n}")
    k = j - 1
    s = cov.sigma
    xx, pp, xp = s[k, k], s[n + k, n + k], s[k, n + k]
    rhs = xp**2 + cov.hbar**2 / 4
    return bool(xx * pp >= rhs - cov.tol.rel_eq * max(rhs, xx * pp))


def project(omega, tol=DEFAULT_TOL):
    """Orthogonal projections of ``{M z.z <= hbar}`` on position and momentum space.

    Returns:
        ``(Omega_X, Omega_P)`` with shape matrices ``M/M_PP`` and ``M/M_XX``.
    """
    M = omega.M if isinstance(omega, PhaseEllipsoid) else require_pd(omega, tol, "M")
    hbar = omega.hbar if isinstance(omega, PhaseEllipsoid) else 1.0
    OX = EllipsoidBody(Space.POSITION, schur_complement(M, "lower", tol), hbar)
    OP = EllipsoidBody(Space.MOMENTUM, schur_complement(M, "upper", tol), hbar)
    return OX, OP


def projection_pair_check(cov):
    """Certify that the projections of the covariance ellipsoid form a dual pair.

    ``Omega_X^hbar ⊆ Omega_P`` is the Loewner relation
    ``M/M_XX <= (M/M_PP)^{-1}``, i.e. every eigenvalue of
    ``(M/M_PP)(M/M_XX)`` is at most one.

    Raises:
        QuantumConditionViolated: ``cov`` does not satisfy the quantum condition.
    """
    if not cov.is_quantum:
        raise QuantumConditionViolated(
            f"nu_min = {cov.nu[0]:.6g} < hbar/2 = {cov.hbar / 2:.6g}"
        )
    OX, OP = project(cov.ellipsoid(), cov.tol)
    return pair_report(OX.A, OP.A, cov.tol)


def wigner_G(psi, tol=DEFAULT_TOL):
    """Wigner matrix ``G`` of ``phi_WY`` and a factor ``S`` with ``G = S^T S``.

    ``S = [[W^{1/2}, 0], [W^{-1/2} Y, W^{-1/2}]]``; both matrices are
    certified symplectic.
    """
    W, Y = psi.W, psi.Y
    Wi = np.linalg.inv(W)
    G = symmetrize(from_blocks(W + Y @ Wi @ Y, Y @ Wi, Wi @ Y, Wi))
    Wh = sym_sqrt(W, tol)
    Whi = sym_inv_sqrt(W, tol)
    S = from_blocks(Wh, np.zeros_like(W), Whi @ Y, Whi)
    certify_symplectic(G, tol, "Wigner matrix G")
    certify_symplectic(S, tol, "Wigner factor S")
    return G, S


def sigma_from_WY(psi, tol=DEFAULT_TOL):
    """Covariance ``(hbar/2) [[W^-1, -W^-1 Y], [-Y W^-1, W + Y W^-1 Y]]``."""
    W, Y = psi.W, psi.Y
    Wi = np.linalg.inv(W)
    sigma = 0.5 * psi.hbar * from_blocks(Wi, -Wi @ Y, -Y @ Wi, W + Y @ Wi @ Y)
    return CovState(symmetrize(sigma), psi.hbar, tol)


def wy_from_sigma(cov):
    """Invert :func:`sigma_from_WY` for a pure covariance matrix.

    Raises:
        NotPure: some symplectic eigenvalue differs from ``hbar/2``.
        ResidualTooLarge: ``Sigma_PP`` is inconsistent with ``Sigma_XX`` and
            ``Sigma_XP`` (the pure-state identity
            ``Sigma_XX Sigma_PP - Sigma_XP^2 = hbar^2/4 I`` fails).
    """
    tol = cov.tol
    h2 = cov.hbar / 2
    if np.max(np.abs(cov.nu - h2)) > tol.rel_eq * h2 * 1e2:
        raise NotPure(f"symplectic eigenvalues {cov.nu} differ from hbar/2 = {h2}")
    XX, XP, _, PP = cov.blocks
    W = symmetrize(h2 * np.linalg.inv(XX))
    Y = symmetrize(-np.linalg.solve(XX, XP))
    res = rel_err(XX @ PP - XP @ XP, h2**2 * np.eye(cov.n))
    if res > 1e2 * tol.rel_eq:
        raise ResidualTooLarge(f"pure-state block identity violated (residual {res:.3e})",
                               residual=res)
    return GaussianPure(W, Y, cov.hbar)


def fourier_gaussian(psi):
    """Parameters of the Fourier transform of ``phi_WY`` (phase dropped).

    ``W' + iY' = (W + iY)^{-1}``, i.e. ``W' = (W + Y W^-1 Y)^-1`` and
    ``Y' = -W^-1 Y W'``.
    """
    W, Y = psi.W, psi.Y
    Wi = np.linalg.inv(W)
    Wp = symmetrize(np.linalg.inv(W + Y @ Wi @ Y))
    Yp = symmetrize(-Wi @ Y @ Wp)
    return GaussianPure(Wp, Yp, psi.hbar)


@dataclass(frozen=True)
class Generator:
    """One of the metaplectic generators ``VP(P)``, ``ML(L)`` or ``J``."""

    kind: str
    matrix: np.ndarray = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in ("VP", "ML", "J"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind != "J":
            if self.matrix is None:
                raise ValueError(f"generator {kind} needs a matrix")
            object.__setattr__(self, "matrix", np.array(self.matrix, dtype=float))

    def symplectic(self, n, tol=DEFAULT_TOL):
        """The projection of the generator onto Sp(n)."""
        if self.kind == "VP":
            return vp(self.matrix)
        if self.kind == "ML":
            return ml(self.matrix, tol)
        return standard_J(n)


def metaplectic_apply(g, psi, tol=DEFAULT_TOL):
    """Action of a metaplectic generator on the parameters of ``phi_WY``.

    ``VP(P)``: ``(W, Y) -> (W, Y - P)``. ``ML(L)``: ``(W, Y) -> (L^T W L,
    L^T Y L)``. ``J``: the Fourier map. The Wigner matrix transforms as
    ``G' = S^{-T} G S^{-1}`` where ``S = g.symplectic(n)``.
    """
    if g.kind == "VP":
        P = as_symmetric(g.matrix, tol, "P")
        if P.shape != psi.W.shape:
            raise DimensionMismatch(f"P is {P.shape}, state has n = {psi.n}")
        return GaussianPure(psi.W, psi.Y - P, psi.hbar)
    if g.kind == "ML":
        ml(g.matrix, tol)  # raises SingularL
        L = g.matrix
        if L.shape != psi.W.shape:
            raise DimensionMismatch(f"L is {L.shape}, state has n = {psi.n}")
        return GaussianPure(symmetrize(L.T @ psi.W @ L), symmetrize(L.T @ psi.Y @ L), psi.hbar)
    return fourier_gaussian(psi)


def purity(cov):
    """``Tr(rho^2) = (hbar/2)^n (det Sigma)^{-1/2}``.

    Cross-checked against ``prod_j (hbar/2) / nu_j``; a mismatch raises
    ``ResidualTooLarge``.
    """
    h2 = cov.hbar / 2
    mu = float(np.exp(cov.n * np.log(h2) - 0.5 * np.log(det_spd(cov.sigma))))
    mu_nu = float(np.prod(h2 / cov.nu))
    if abs(mu - mu_nu) > 1e3 * cov.tol.rel_eq * max(mu, 1.0):
        raise ResidualTooLarge(f"purity {mu} disagrees with symplectic spectrum {mu_nu}",
                               residual=abs(mu - mu_nu))
    return mu


@dataclass(frozen=True)
class BlobVerdict:
    is_blob: bool
    witness: np.ndarray = None

    def __bool__(self):
        return self.is_blob


def is_quantum_blob(cov):
    """Whether every symplectic eigenvalue equals ``hbar/2``.

    The witness ``S`` satisfies ``Sigma = (hbar/2) S^T S``.
    """
    h2 = cov.hbar / 2
    if np.max(np.abs(cov.nu - h2)) > 1e2 * cov.tol.rel_eq * h2:
        return BlobVerdict(False)
    return BlobVerdict(True, williamson(cov.sigma, cov.tol).S)


def _state_cov(state, tol=DEFAULT_TOL):
    if isinstance(state, GaussianPure):
        return sigma_from_WY(state, tol)
    if isinstance(state, GaussianMixed):
        return state.cov
    if isinstance(state, CovState):
        return state
    raise TypeError(f"expected a Gaussian state, got {type(state).__name__}")


def gaussian_density(cov_matrix, u):
    """Centered normal density with covariance ``cov_matrix`` at the rows of ``u``."""
    C = np.atleast_2d(np.asarray(cov_matrix, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    d = C.shape[0]
    if u.shape[1] != d:
        u = u.reshape(-1, d)
    q = np.einsum("ij,ij->i", u, np.linalg.solve(C, u.T).T)
    norm = (2 * pi) ** (-d / 2) / np.sqrt(np.linalg.det(C))
    return norm * np.exp(-0.5 * q)


def wigner_eval(state, z):
    """Wigner function ``(2 pi)^-n (det Sigma)^-1/2 exp(-Sigma^-1 z.z / 2)``.

    ``z`` may be a single point or an array of points (rows). Returns a
    float for a single point.
    """
    cov = _state_cov(state)
    z = np.asarray(z, dtype=float)
    out = gaussian_density(cov.sigma, z)
    return float(out[0]) if z.ndim == 1 else out


def marginal(state, axis, coordinate):
    """Position (``axis="x"``) or momentum (``axis="p"``) marginal density."""
    cov = _state_cov(state)
    XX, _, _, PP = cov.blocks
    if axis in ("x", "position"):
        C = XX
    elif axis in ("p", "momentum"):
        C = PP
    else:
        raise ValueError(f"axis must be 'x' or 'p', got {axis!r}")
    coordinate = np.asarray(coordinate, dtype=float)
    out = gaussian_density(C, coordinate)
    return float(out[0]) if coordinate.ndim <= 1 and out.size == 1 else out


def random_cov_state(seed, n, hbar=1.0, kind="mixed", spread=0.5, tol=DEFAULT_TOL):
    """Seeded random covariance matrix ``S^T diag(nu, nu) S``.

    Args:
        seed: integer seed or ``numpy.random.Generator``.
        n: number of degrees of freedom.
        hbar: action unit.
        kind: ``"blob"`` (all ``nu = hbar/2``), ``"mixed"`` (``nu_j =
            hbar/2 (1 + |xi_j|)``, always quantum) or ``"any"``
            (``nu_j = hbar/2 exp(xi_j / 2)``, quantum or not).
        spread: size of the random symplectic factors.
        tol: tolerance policy attached to the state.

    Returns:
        CovState.
    """
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(n)
    if kind == "blob":
        nu = np.full(n, hbar / 2)
    elif kind == "mixed":
        nu = hbar / 2 * (1 + np.abs(xi))
    elif kind == "any":
        nu = hbar / 2 * np.exp(xi / 2)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    S = random_symplectic(rng.integers(2**63), n, spread)
    D = np.diag(np.concatenate([nu, nu]))
    return CovState(symmetrize(S.T @ D @ S), hbar, tol)


def random_gaussian_pure(seed, n, hbar=1.0):
    """Seeded random ``(W, Y)``: ``W = exp`` of a symmetric Gaussian, ``Y`` symmetric Gaussian."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    w, Q = np.linalg.eigh(symmetrize(G) * 0.5)
    W = (Q * np.exp(w)) @ Q.T
    Y = symmetrize(rng.standard_normal((n, n)))
    return GaussianPure(W, Y, hbar)


__all__ = [
    "BlobVerdict",
    "CovState",
    "GaussianMixed",
    "GaussianPure",
    "Generator",
    "PhaseEllipsoid",
    "QuantumVerdict",
    "fourier_gaussian",
    "gaussian_density",
    "is_quantum_blob",
    "marginal",
    "metaplectic_apply",
    "project",
    "projection_pair_check",
    "purity",
    "quantum_condition",
    "random_cov_state",
    "random_gaussian_pure",
    "rsup_check",
    "sigma_from_WY",
    "wigner_G",
    "wigner_eval",
    "wy_from_sigma",
]
