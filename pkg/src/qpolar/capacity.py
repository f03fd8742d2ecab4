"""Symplectic capacities of ellipsoids and of products of dual ellipsoids."""

from dataclasses import dataclass, field, replace
from math import factorial, pi

import numpy as np

from .errors import DimensionMismatch, SpaceMismatch, UnsupportedBody, VerificationFailed
from .gaussian import PhaseEllipsoid, quantum_condition
from .matcore import DEFAULT_TOL, det_spd, loewner_leq
from .polarity import EllipsoidBody, Space, pair_report
from .symplectic import symplectic_eigenvalues

ELLIPSOID_NU_MAX = "EllipsoidNuMax"
PRODUCT_SCALING = "ProductScaling"


@dataclass(frozen=True)
class CapacityReport:
    """A capacity value with the spectral data it was computed from.

    Attributes:
        value: the capacity (action units).
        formula: ``"EllipsoidNuMax"`` or ``"ProductScaling"``.
        witnesses: symplectic eigenvalues ``nu`` (ellipsoids) or the
            eigenvalues ``lam`` of ``A B`` (products), ascending.
        extra: cross-check values keyed by name.
    """

    value: float
    formula: str
    witnesses: np.ndarray
    extra: dict = field(default_factory=dict)


def capacity_ellipsoid(omega, tol=DEFAULT_TOL):
    """Capacity ``pi hbar / nu_max(M)`` of ``{M z.z <= hbar}``.

    All symplectic capacities agree on ellipsoids.
    """
    if not isinstance(omega, PhaseEllipsoid):
        omega = PhaseEllipsoid(omega)
    nu = symplectic_eigenvalues(omega.M, tol)
    return CapacityReport(pi * omega.hbar / float(nu[-1]), ELLIPSOID_NU_MAX, nu)


@dataclass(frozen=True)
class ThresholdReport:
    capacity: float
    quantum: bool


def capacity_quantum_threshold(cov):
    """Capacity of the covariance ellipsoid and the test ``c >= pi hbar``.

    The slack ``pi hbar rel_eq`` matches the ``hbar/2 rel_eq`` slack of the
    symplectic-eigenvalue test, so the two verdicts are the same statement.

    Raises:
        VerificationFailed: the verdict disagrees with ``quantum_condition``.
    """
    cap = capacity_ellipsoid(cov.ellipsoid(), cov.tol).value
    quantum = bool(cap >= pi * cov.hbar * (1 - cov.tol.rel_eq))
    if quantum != quantum_condition(cov).holds:
        raise VerificationFailed(
            f"capacity verdict {quantum} (c = {cap!r}) disagrees with nu_min = {cov.nu[0]!r}"
        )
    return ThresholdReport(cap, quantum)


def _normalized_pair(X, P, hbar):
    if Space(X.space) is not Space.POSITION or Space(P.space) is not Space.MOMENTUM:
        raise SpaceMismatch("expected X in position space and P in momentum space")
    if X.dim != P.dim:
        raise DimensionMismatch(f"X has dimension {X.dim}, P has {P.dim}")
    return X.normalized(hbar).A, P.normalized(hbar).A


def max_dual_scaling(A, B, tol=DEFAULT_TOL, rtol=1e-15):
    """``max{s : s X^hbar ⊆ P}`` for ``X = {A x.x <= hbar}``, ``P = {B p.p <= hbar}``.

    ``s X^hbar = {A^{-1} p.p <= s^2 hbar}`` lies in ``P`` iff
    ``s^2 B <= A^{-1}`` in the Loewner order. The threshold is found by
    bisection on that test alone, without an eigenvalue formula.
    """
    Ainv = np.linalg.inv(A)
    strict = replace(tol, psd_slack=1e-15)

    def inside(s):
        return loewner_leq(s * s * B, Ainv, strict)

    lo, hi = 1.0, 1.0
    while inside(hi):
        hi *= 2
    while not inside(lo):
        lo /= 2
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cmax_product(X, P, hbar=1.0, tol=DEFAULT_TOL):
    """Cylindrical capacity of the product ``X x P`` of two ellipsoids.

    In the frame where ``A`` and ``B`` are both ``diag(sqrt(lam))``, the
    product sits inside the cylinder over the plane of the mode with the
    largest ``lam``, whose cross-section is a rectangle of area
    ``4 hbar / sqrt(lam_max)``. Equivalently ``c_max = 4 hbar s`` with
    ``s = max{s : s X^hbar ⊆ P}``. Both routes are computed and must agree.

    Returns:
        CapacityReport with ``extra`` holding the scaling factor from each
        route and ``inverse_eigenvalue_formula`` (``4 hbar / lam_min``) for
        comparison; that value differs from the capacity unless
        ``lam_min = sqrt(lam_max)``, e.g. for a saturated pair.

    Raises:
        VerificationFailed: the two routes disagree beyond ``rel_eq``.
    """
    A, B = _normalized_pair(X, P, hbar)
    lam = pair_report(A, B, tol).lam[::-1].copy()
    s_eig = float(lam[-1] ** -0.5)
    s_scan = max_dual_scaling(A, B, tol)
    agreement = abs(s_eig - s_scan) / s_eig
    if agreement > tol.rel_eq:
        raise VerificationFailed(
            f"scaling factor {s_scan!r} disagrees with eigenvalue route {s_eig!r}",
            residual=agreement,
        )
    value = 4 * hbar * s_eig
    literal = 4 * hbar / float(lam[0])
    extra = {
        "scaling_eigen": s_eig,
        "scaling_loewner": s_scan,
        "route_disagreement": agreement,
        "inverse_eigenvalue_formula": literal,
        "inverse_eigenvalue_formula_matches": abs(literal - value) <= tol.rel_eq * value,
    }
    return CapacityReport(value, PRODUCT_SCALING, lam, extra)


@dataclass(frozen=True)
class IsoperimetricReport:
    lhs: float
    rhs: float
    holds: bool


def phase_ellipsoid_volume(omega):
    """Volume ``(pi hbar)^n / (n! sqrt(det M))`` of ``{M z.z <= hbar}``."""
    n = omega.n
    return (pi * omega.hbar) ** n / (factorial(n) * np.sqrt(det_spd(omega.M)))


def isoperimetric_check(body, volume=None, hbar=1.0, tol=DEFAULT_TOL):
    """Compare a capacity with ``(n!)^{1/n} |K|^{1/n}``.

    Args:
        body: a ``PhaseEllipsoid`` (where the inequality is a theorem) or a
            pair ``(X, P)`` of position and momentum ellipsoids (where it is
            the Viterbo inequality applied to ``X x P`` with ``c_max``).
        volume: the volume ``|K|``; computed exactly when omitted.
        hbar: action unit for products.
        tol: tolerance policy; ``holds`` allows a relative slack ``rel_eq``.

    Returns:
        IsoperimetricReport.
    """
    if isinstance(body, PhaseEllipsoid):
        n = body.n
        lhs = capacity_ellipsoid(body, tol).value
        if volume is None:
            volume = phase_ellipsoid_volume(body)
    elif (isinstance(body, tuple) and len(body) == 2
          and all(isinstance(b, EllipsoidBody) for b in body)):
        X, P = body
        n = X.dim
        lhs = cmax_product(X, P, hbar, tol).value
        if volume is None:
            volume = X.volume * P.volume
    else:
        raise UnsupportedBody(f"no capacity available for {type(body).__name__}")
    rhs = float(factorial(n) ** (1 / n) * volume ** (1 / n))
    return IsoperimetricReport(lhs, rhs, bool(lhs <= rhs * (1 + tol.rel_eq)))


__all__ = [
    "CapacityReport",
    "ELLIPSOID_NU_MAX",
    "IsoperimetricReport",
    "PRODUCT_SCALING",
    "ThresholdReport",
    "capacity_ellipsoid",
    "capacity_quantum_threshold",
    "cmax_product",
    "isoperimetric_check",
    "max_dual_scaling",
    "phase_ellipsoid_volume",
]
