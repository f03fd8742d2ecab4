"""Centered convex bodies and their hbar-polar duals.

A body in position space ``X`` has the dual ``X^hbar = {p : p.x <= hbar for
all x in X}`` in momentum space and vice versa. Ellipsoids, boxes and
cross-polytopes have closed-form duals, which is all this module handles.
"""

from dataclasses import dataclass
from enum import Enum
from math import factorial, gamma, pi

import numpy as np

from .errors import DimensionMismatch, PhaseSpaceBody, SpaceMismatch
from .matcore import (
    DEFAULT_TOL,
    as_symmetric,
    eigh_sym,
    require_pd,
    sym_sqrt,
    symmetrize,
)
from .symplectic import certify_symplectic, symplectic_inverse


class Space(str, Enum):
    POSITION = "position"
    MOMENTUM = "momentum"
    PHASE = "phase"

    def dual(self):
        if self is Space.POSITION:
            return Space.MOMENTUM
        if self is Space.MOMENTUM:
            return Space.POSITION
        raise PhaseSpaceBody("polar duality pairs position and momentum spaces only")


def ball_volume(d, radius=1.0):
    return pi ** (d / 2) * radius**d / gamma(d / 2 + 1)


@dataclass(frozen=True)
class EllipsoidBody:
    """The ellipsoid ``{u : A u.u <= level}`` in ``space``."""

    space: Space
    A: np.ndarray
    level: float

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        object.__setattr__(self, "A", require_pd(self.A, name="ellipsoid shape"))
        if not (np.isfinite(self.level) and self.level > 0):
            raise ValueError(f"level must be positive, got {self.level}")
        object.__setattr__(self, "level", float(self.level))

    @classmethod
    def ball(cls, space, dim, radius):
        return cls(space, np.eye(dim), radius**2)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def volume(self):
        d = self.dim
        return (pi * self.level) ** (d / 2) / (gamma(d / 2 + 1) * np.sqrt(np.linalg.det(self.A)))

    def normalized(self, hbar):
        """Same set written with level ``hbar``: ``{(A hbar / level) u.u <= hbar}``."""
        return EllipsoidBody(self.space, self.A * (hbar / self.level), hbar)

    def contains(self, u, slack=0.0):
        u = np.atleast_2d(u)
        q = np.einsum("ij,jk,ik->i", u, self.A, u)
        return q <= self.level * (1 + slack)


@dataclass(frozen=True)
class BoxBody:
    """The box ``prod_i [-a_i, a_i]``."""

    space: Space
    half_widths: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        a = np.atleast_1d(np.asarray(self.half_widths, dtype=float))
        if a.ndim != 1 or not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ValueError("half_widths must be a vector of positive reals")
        object.__setattr__(self, "half_widths", a)

    @property
    def dim(self):
        return self.half_widths.size

    @property
    def volume(self):
        return float(np.prod(2 * self.half_widths))

    def contains(self, u, slack=0.0):
        u = np.atleast_2d(u)
        return np.all(np.abs(u) <= self.half_widths * (1 + slack), axis=1)


@dataclass(frozen=True)
class CrossPolytopeBody:
    """The weighted cross-polytope ``{u : sum_i w_i |u_i| <= level}``."""

    space: Space
    weights: np.ndarray
    level: float

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be a vector of positive reals")
        if not (np.isfinite(self.level) and self.level > 0):
            raise ValueError(f"level must be positive, got {self.level}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "level", float(self.level))

    @property
    def dim(self):
        return self.weights.size

    @property
    def volume(self):
        # Simplex decomposition: 2^d orthant simplices of volume prod(h / w_i) / d!.
        d = self.dim
        return float((2 * self.level) ** d / (factorial(d) * np.prod(self.weights)))

    def contains(self, u, slack=0.0):
        u = np.atleast_2d(u)
        return np.abs(u) @ self.weights <= self.level * (1 + slack)


def polar_dual(body, hbar=1.0):
    """hbar-polar dual of an ellipsoid, box or cross-polytope.

    ``{A u.u <= h}`` maps to ``{A^{-1} p.p <= hbar^2 / h}``; a box with
    half-widths ``a`` maps to the cross-polytope ``{sum a_i |p_i| <= hbar}``
    and back. The space tag flips between position and momentum.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    space = Space(body.space).dual()
    if isinstance(body, EllipsoidBody):
        return EllipsoidBody(space, symmetrize(np.linalg.inv(body.A)), hbar**2 / body.level)
    if isinstance(body, BoxBody):
        return CrossPolytopeBody(space, body.half_widths.copy(), hbar)
    if isinstance(body, CrossPolytopeBody):
        return BoxBody(space, hbar * body.weights / body.level)
    raise TypeError(f"no closed-form dual for {type(body).__name__}")


def support_function(body, direction):
    """``h_K(d) = sup_{u in K} u.d`` for a unit (normalized internally) direction."""
    d = np.asarray(direction, dtype=float).ravel()
    norm = np.linalg.norm(d)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    d = d / norm
    if isinstance(body, EllipsoidBody):
        return float(np.sqrt(body.level * d @ np.linalg.solve(body.A, d)))
    if isinstance(body, BoxBody):
        return float(np.abs(d) @ body.half_widths)
    if isinstance(body, CrossPolytopeBody):
        return float(body.level * np.max(np.abs(d) / body.weights))
    raise TypeError(f"no support function for {type(body).__name__}")


@dataclass(frozen=True)
class DualPairReport:
    is_pair: bool
    is_saturated: bool
    lam: np.ndarray
    witness: np.ndarray = None

    def as_dict(self):
        return {
            "is_pair": self.is_pair,
            "is_saturated": self.is_saturated,
            "lambda": self.lam.tolist(),
            "witness": None if self.witness is None else self.witness.tolist(),
        }


def pair_report(A, B, tol=DEFAULT_TOL):
    """Dual-pair verdict for ``X = {A x.x <= hbar}``, ``P = {B p.p <= hbar}``.

    The pair condition ``X^hbar ⊆ P`` is ``eig(A B) <= 1``. The eigenvalues
    are taken from the symmetric similar matrix ``A^{1/2} B A^{1/2}``. On
    failure the witness is the eigenvector ``p = A^{1/2} u`` of ``A B`` for the
    top eigenvalue, scaled onto the boundary of ``X^hbar``; it lies in
    ``X^hbar`` but outside ``P``.
    """
    A = as_symmetric(A, tol, "A")
    B = as_symmetric(B, tol, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}")
    Ah = sym_sqrt(A, tol)
    lam, U = eigh_sym(Ah @ B @ Ah)
    lam_desc = lam[::-1].copy()
    is_pair = bool(lam_desc[0] <= 1 + tol.rel_eq)
    is_saturated = bool(np.all(np.abs(lam_desc - 1) <= tol.rel_eq))
    witness = None
    if not is_pair:
        p = Ah @ U[:, -1]
        witness = p / np.sqrt(p @ np.linalg.solve(A, p))
    return DualPairReport(is_pair, is_saturated, lam_desc, witness)


def is_quantum_pair(X, P, hbar=1.0, tol=DEFAULT_TOL):
    """Decide whether ``X^hbar ⊆ P`` for a position and a momentum ellipsoid.

    The returned witness is scaled for level ``hbar``.
    """
    if Space(X.space) is not Space.POSITION or Space(P.space) is not Space.MOMENTUM:
        raise SpaceMismatch("expected X in position space and P in momentum space")
    if X.dim != P.dim:
        raise DimensionMismatch(f"X has dimension {X.dim}, P has {P.dim}")
    rep = pair_report(X.normalized(hbar).A, P.normalized(hbar).A, tol)
    if rep.witness is not None:
        rep = DualPairReport(rep.is_pair, rep.is_saturated, rep.lam, rep.witness * np.sqrt(hbar))
    return rep


@dataclass(frozen=True)
class FramedBody:
    """A body living in the Lagrangian plane ``frame @ l_X`` or ``frame @ l_P``.

    ``body`` is its coordinate model in ``l_X = R^n x 0`` (position space) or
    ``l_P = 0 x R^n`` (momentum space); the phase-space set is
    ``frame @ embed(body)``.
    """

    frame: np.ndarray
    body: EllipsoidBody

    @property
    def n(self):
        return self.body.dim

    def embed(self, u):
        """Phase-space images of model coordinates ``u`` (rows)."""
        u = np.atleast_2d(u)
        zero = np.zeros_like(u)
        if self.body.space is Space.POSITION:
            z = np.hstack([u, zero])
        else:
            z = np.hstack([zero, u])
        return z @ self.frame.T

    def transformed(self, S0):
        """The image ``S0 @ self`` (same model body, frame ``S0 @ frame``)."""
        return FramedBody(np.asarray(S0, dtype=float) @ self.frame, self.body)


def lagrangian_polar_dual(framed, hbar=1.0, tol=DEFAULT_TOL):
    """Polar dual of a body in ``l = S l_X`` taken inside ``l' = S l_P``.

    Uses ``X^hbar_{l'} = S (S^{-1} X_l)^hbar``: the frame is kept and the
    model body is dualized. Applied to a body in ``S l_P`` it returns the
    dual in ``S l_X``, which gives biduality.
    """
    if isinstance(framed, EllipsoidBody):
        raise TypeError("pass a FramedBody; wrap plain bodies with the identity frame")
    S = certify_symplectic(framed.frame, tol, "frame")
    if framed.body.space is Space.PHASE:
        raise PhaseSpaceBody("frame models live in position or momentum space")
    return FramedBody(S, polar_dual(framed.body, hbar))


def omega(z, w):
    """Symplectic form ``omega(z, w) = p.x' - x.p'`` for rows of ``z`` and ``w``."""
    z = np.atleast_2d(z)
    w = np.atleast_2d(w)
    n = z.shape[1] // 2
    return z[:, n:] @ w[:, :n].T - z[:, :n] @ w[:, n:].T


def model_coordinates(framed, z):
    """Model coordinates of phase-space points ``z`` assumed to lie in the framed plane."""
    z = np.atleast_2d(z) @ symplectic_inverse(framed.frame).T
    n = framed.n
    return z[:, :n] if framed.body.space is Space.POSITION else z[:, n:]


def random_spd(seed, n, spread=0.5):
    """Seeded SPD matrix ``Q diag(exp(spread xi)) Q^T`` with ``Q`` Haar-orthogonal."""
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    return symmetrize((Q * np.exp(spread * rng.standard_normal(n))) @ Q.T)


def random_quantum_pair(seed, n, lam_min=0.2, spread=0.5):
    """Seeded shapes ``(A, B)`` with the eigenvalues of ``A B`` drawn from ``[lam_min, 1]``.

    ``B = A^{-1/2} U diag(lam) U^T A^{-1/2}`` with ``U`` Haar-orthogonal, so
    ``A`` and ``B`` do not commute in general.
    """
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n, spread)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    U = Q * np.sign(np.diag(R))
    lam = rng.uniform(lam_min, 1.0, n)
    w, V = eigh_sym(A)
    Ahi = (V / np.sqrt(w)) @ V.T
    return A, symmetrize(Ahi @ (U * lam) @ U.T @ Ahi)


__all__ = [
    "BoxBody",
    "CrossPolytopeBody",
    "DualPairReport",
    "EllipsoidBody",
    "FramedBody",
    "Space",
    "ball_volume",
    "is_quantum_pair",
    "lagrangian_polar_dual",
    "model_coordinates",
    "omega",
    "pair_report",
    "polar_dual",
    "random_quantum_pair",
    "random_spd",
    "support_function",
]
