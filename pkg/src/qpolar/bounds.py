"""Volume and concentration bounds: Mahler volumes, Hardy pairs, Donoho-Stark.

Closed forms are paired with sampling oracles: a hit-or-miss Monte Carlo
volume estimator and a scrambled-Halton estimator for Gaussian masses.
"""

from dataclasses import dataclass, field
from math import factorial, gamma, pi, sqrt
from typing import Callable, Optional

import numpy as np
from scipy.special import erf
from scipy.stats import chi2, norm, qmc

from .errors import DegenerateBox, ResidualTooLarge, SpaceMismatch, UnsupportedBody
from .gaussian import CovState, GaussianMixed, GaussianPure, sigma_from_WY
from .matcore import DEFAULT_TOL, rel_err, require_pd, sym_sqrt
from .polarity import (
    BoxBody,
    CrossPolytopeBody,
    EllipsoidBody,
    Space,
    pair_report,
    polar_dual,
)


@dataclass(frozen=True)
class BodyOracle:
    """Membership view of a centered convex body.

    Attributes:
        dim: ambient dimension.
        contains: maps an ``(m, dim)`` array of points to ``m`` booleans.
        half_widths: half-widths of a centered bounding box.
        exact_volume: closed-form volume when known.
    """

    dim: int
    contains: Callable
    half_widths: np.ndarray
    exact_volume: Optional[float] = None

    @classmethod
    def from_body(cls, body):
        if isinstance(body, EllipsoidBody):
            hw = np.sqrt(body.level * np.diag(np.linalg.inv(body.A)))
        elif isinstance(body, BoxBody):
            hw = body.half_widths
        elif isinstance(body, CrossPolytopeBody):
            hw = body.level / body.weights
        else:
            raise UnsupportedBody(f"no oracle for {type(body).__name__}")
        return cls(body.dim, body.contains, np.array(hw, dtype=float), float(body.volume))


@dataclass(frozen=True)
class VolumeEstimate:
    estimate: float
    std_error: float


def mc_volume(body, seed, samples=10**6, batch=2**16):
    """Hit-or-miss volume estimate over the bounding box.

    The standard error is ``V_box sqrt(p (1 - p) / N)`` for hit fraction ``p``.

    Raises:
        DegenerateBox: a bounding half-width is not a positive finite number.
    """
    if not isinstance(body, BodyOracle):
        body = BodyOracle.from_body(body)
    if samples < 10**4:
        raise ValueError(f"need at least 10^4 samples, got {samples}")
    hw = np.asarray(body.half_widths, dtype=float)
    if hw.shape != (body.dim,) or not np.all(np.isfinite(hw)) or np.any(hw <= 0):
        raise DegenerateBox(f"invalid bounding box half-widths {hw}")
    rng = np.random.default_rng(seed)
    hits = 0
    left = samples
    while left > 0:
        m = min(batch, left)
        u = rng.uniform(-1.0, 1.0, size=(m, body.dim)) * hw
        hits += int(np.count_nonzero(body.contains(u)))
        left -= m
    box = float(np.prod(2 * hw))
    p = hits / samples
    return VolumeEstimate(box * p, box * sqrt(p * (1 - p) / samples))


def kuperberg_lower(n, hbar=1.0):
    return (pi * hbar) ** n / (4**n * factorial(n))


def mahler_conjectured_min(n, hbar=1.0):
    return (4 * hbar) ** n / factorial(n)


def santalo_upper(n, hbar=1.0):
    return (pi * hbar) ** n / gamma(n / 2 + 1) ** 2


@dataclass(frozen=True)
class MahlerReport:
    upsilon: float
    lower_kuperberg: float
    lower_conjecture: float
    upper_santalo: float
    within_bounds: bool
    closed_form: float

    def as_dict(self):
        return {
            "upsilon": self.upsilon,
            "closed_form": self.closed_form,
            "lower_kuperberg": self.lower_kuperberg,
            "lower_conjecture": self.lower_conjecture,
            "upper_santalo": self.upper_santalo,
            "within_bounds": self.within_bounds,
        }


def mahler_volume(body, hbar=1.0, tol=DEFAULT_TOL):
    """``|X| |X^hbar|`` for an ellipsoid or a box, with the bound chain.

    The product is evaluated from the two volumes and compared with the
    shape-independent closed form: ``(pi hbar)^n / Gamma(n/2 + 1)^2`` for
    ellipsoids and ``(4 hbar)^n / n!`` for boxes.

    Raises:
        UnsupportedBody: the body is neither an ellipsoid nor a box.
    """
    if isinstance(body, EllipsoidBody):
        closed = santalo_upper(body.dim, hbar)
    elif isinstance(body, BoxBody):
        closed = mahler_conjectured_min(body.dim, hbar)
    else:
        raise UnsupportedBody(f"no closed-form Mahler volume for {type(body).__name__}")
    if Space(body.space) is Space.PHASE:
        raise UnsupportedBody("Mahler volumes are taken in position or momentum space")
    n = body.dim
    ups = float(body.volume * polar_dual(body, hbar).volume)
    if abs(ups - closed) > 1e2 * tol.rel_eq * closed:
        raise ResidualTooLarge(f"Mahler product {ups!r} departs from closed form {closed!r}",
                               residual=abs(ups - closed) / closed)
    lo, mid, hi = kuperberg_lower(n, hbar), mahler_conjectured_min(n, hbar), santalo_upper(n, hbar)
    slack = tol.rel_eq * hi
    within = bool(lo - slack <= ups <= hi + slack)
    return MahlerReport(ups, lo, mid, hi, within, closed)


UNIQUE_GAUSSIAN = "UniqueGaussian"
INFINITE_FAMILY = "InfiniteFamily"
NO_FUNCTION = "NoFunction"


@dataclass(frozen=True)
class HardyVerdict:
    """Classification of ``|psi| <= C exp(-A x.x / 2 hbar)``, ``|psi^| <= C exp(-B p.p / 2 hbar)``.

    Attributes:
        lambdas: eigenvalues of ``A B``, descending.
        case: ``"NoFunction"``, ``"UniqueGaussian"`` or ``"InfiniteFamily"``.
        hardy_capacity: capacity ``pi hbar / sqrt(lam_max)`` of
            ``{A x.x + B p.p <= hbar}``.
        state: the Gaussian ``W = A, Y = 0`` in the unique case.
        note: description of the solution set.
    """

    lambdas: np.ndarray
    case: str
    hardy_capacity: float
    state: Optional[GaussianPure] = None
    note: str = ""


def hardy_classify(A, B, hbar=1.0, tol=DEFAULT_TOL):
    """Hardy's uncertainty principle for the Gaussian envelopes ``A`` and ``B``.

    The symplectic eigenvalues of ``diag(A, B)`` are ``sqrt(lam_j)``, so the
    capacity of the Hardy ellipsoid is ``pi hbar / sqrt(lam_max)``.
    """
    A = require_pd(A, tol, "A")
    B = require_pd(B, tol, "B")
    rep = pair_report(A, B, tol)
    lam = rep.lam
    cap = pi * hbar / sqrt(lam[0])
    if not rep.is_pair:
        return HardyVerdict(lam, NO_FUNCTION, cap, note="only psi = 0 satisfies both bounds")
    if rep.is_saturated:
        return HardyVerdict(lam, UNIQUE_GAUSSIAN, cap,
                            state=GaussianPure(A, np.zeros_like(A), hbar),
                            note="multiples of exp(-A x.x / 2 hbar)")
    return HardyVerdict(lam, INFINITE_FAMILY, cap,
                        note="finite combinations of rescaled Hermite functions")


@dataclass(frozen=True)
class ConcentrationResult:
    """``eps`` with ``eps^2`` the probability mass outside the body."""

    eps: float
    std_error: float
    method: str


def _marginal_cov(state, side):
    if isinstance(state, GaussianPure):
        cov = sigma_from_WY(state)
    elif isinstance(state, GaussianMixed):
        cov = state.cov
    elif isinstance(state, CovState):
        cov = state
    else:
        raise TypeError(f"expected a Gaussian state, got {type(state).__name__}")
    XX, _, _, PP = cov.blocks
    return XX if side is Space.POSITION else PP


def _qmc_outside(C, contains, seed, points, scrambles):
    d = C.shape[0]
    L = np.linalg.cholesky(C)
    fractions = []
    for r in range(scrambles):
        sampler = qmc.Halton(d, scramble=True, seed=np.random.default_rng([seed, r]))
        u = sampler.random(points)
        g = norm.ppf(np.clip(u, 1e-16, 1 - 1e-16)) @ L.T
        fractions.append(1.0 - np.count_nonzero(contains(g)) / points)
    fractions = np.array(fractions)
    return float(fractions.mean()), float(fractions.std(ddof=1) / sqrt(scrambles))


def concentration(state, body, side, seed=0, points=2**14, scrambles=16, tol=DEFAULT_TOL):
    """Concentration ``eps`` of a Gaussian marginal on a body.

    Exact methods are used where available: boxes under a diagonal
    covariance (product of ``erf`` terms) and ellipsoids whose shape is a
    multiple of the inverse covariance (a chi-square tail). Everything else
    uses scrambled Halton points, with the standard error of ``eps^2`` taken
    across independent scrambles and propagated to ``eps``.

    Raises:
        SpaceMismatch: the body does not live on ``side``.
    """
    side = Space(side)
    if Space(body.space) is not side:
        raise SpaceMismatch(f"body lives in {body.space.value} space, asked for {side.value}")
    C = _marginal_cov(state, side)
    d = C.shape[0]
    if isinstance(body, BoxBody):
        off = C - np.diag(np.diag(C))
        if np.max(np.abs(off)) <= tol.rel_eq * np.max(np.abs(C)):
            inside = np.prod(erf(body.half_widths / np.sqrt(2 * np.diag(C))))
            return ConcentrationResult(float(sqrt(max(0.0, 1.0 - inside))), 0.0, "erf-product")
    elif isinstance(body, EllipsoidBody):
        Ch = sym_sqrt(C, tol)
        K = Ch @ body.A @ Ch
        kappa = float(np.trace(K) / d)
        if rel_err(K, kappa * np.eye(d)) <= tol.rel_eq:
            outside = float(chi2.sf(body.level / kappa, d))
            return ConcentrationResult(sqrt(outside), 0.0, "chi-square")
    elif not isinstance(body, CrossPolytopeBody):
        raise UnsupportedBody(f"no concentration for {type(body).__name__}")
    outside, se = _qmc_outside(C, body.contains, seed, points, scrambles)
    eps = sqrt(max(outside, 0.0))
    eps_se = se / (2 * eps) if eps > 0 else sqrt(se)
    return ConcentrationResult(eps, eps_se, "halton-qmc")


def band_lower(n):
    """Smallest ``eps_X + eps_X^hbar`` compatible with the Santalo bound."""
    return 1.0 - 1.0 / (2 ** (n / 2) * gamma(n / 2 + 1))


def band_upper_kuperberg(n):
    """Largest ``eps_X + eps_X^hbar`` at equality in the Kuperberg bound."""
    return 1.0 - 1.0 / (8 ** (n / 2) * sqrt(factorial(n)))


def band_upper_conjecture_stated(n):
    """The conjecture-based upper endpoint in its commonly quoted form."""
    return 1.0 - 2.0 / ((2 * pi) ** (n / 2) * sqrt(factorial(n)))


def band_upper_conjecture_derived(n):
    """Upper endpoint obtained by inserting ``(4 hbar)^n / n!`` into Donoho-Stark."""
    return 1.0 - (2 / pi) ** (n / 2) / sqrt(factorial(n))


@dataclass(frozen=True)
class ConcentrationReport:
    """Donoho-Stark evaluation.

    ``holds`` is ``None`` when ``eps_x + eps_p >= 1`` (the inequality is then
    vacuous). ``band`` is filled only when ``P`` is the polar dual of ``X``.
    """

    eps_x: float
    eps_p: float
    ds_lhs: float
    ds_rhs: float
    holds: Optional[bool]
    vacuous: bool
    band: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "eps_x": self.eps_x,
            "eps_p": self.eps_p,
            "ds_lhs": self.ds_lhs,
            "ds_rhs": self.ds_rhs,
            "holds": self.holds,
            "vacuous": self.vacuous,
            "band": self.band,
        }


def _is_polar_pair(X, P, hbar, tol):
    try:
        D = polar_dual(X, hbar)
    except TypeError:
        return False
    if type(D) is not type(P) or D.dim != P.dim:
        return False
    if isinstance(D, EllipsoidBody):
        return rel_err(D.normalized(hbar).A, P.normalized(hbar).A) <= 1e2 * tol.rel_eq
    if isinstance(D, BoxBody):
        return rel_err(D.half_widths, P.half_widths) <= 1e2 * tol.rel_eq
    return (rel_err(D.weights / D.level, P.weights / P.level) <= 1e2 * tol.rel_eq)


def donoho_stark_band(n):
    return {
        "lower": band_lower(n),
        "upper_kuperberg": band_upper_kuperberg(n),
        "upper_conjecture_stated": band_upper_conjecture_stated(n),
        "upper_conjecture_derived": band_upper_conjecture_derived(n),
    }


def donoho_stark_check(eps_x, eps_p, X, P, hbar=1.0, tol=DEFAULT_TOL):
    """Evaluate ``|X| |P| >= (2 pi hbar)^n (1 - eps_x - eps_p)^2``."""
    for name, e in (("eps_x", eps_x), ("eps_p", eps_p)):
        if not 0.0 <= e <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {e}")
    if X.dim != P.dim:
        raise SpaceMismatch(f"X has dimension {X.dim}, P has {P.dim}")
    n = X.dim
    lhs = float(X.volume * P.volume)
    rhs = float((2 * pi * hbar) ** n * (1 - eps_x - eps_p) ** 2)
    vacuous = eps_x + eps_p >= 1.0
    holds = None if vacuous else bool(lhs >= rhs * (1 - tol.rel_eq))
    band = donoho_stark_band(n) if _is_polar_pair(X, P, hbar, tol) else {}
    return ConcentrationReport(float(eps_x), float(eps_p), lhs, rhs, holds, vacuous, band)


__all__ = [
    "BodyOracle",
    "ConcentrationReport",
    "ConcentrationResult",
    "HardyVerdict",
    "INFINITE_FAMILY",
    "MahlerReport",
    "NO_FUNCTION",
    "UNIQUE_GAUSSIAN",
    "VolumeEstimate",
    "band_lower",
    "band_upper_conjecture_derived",
    "band_upper_conjecture_stated",
    "band_upper_kuperberg",
    "concentration",
    "donoho_stark_band",
    "donoho_stark_check",
    "hardy_classify",
    "kuperberg_lower",
    "mahler_conjectured_min",
    "mahler_volume",
    "mc_volume",
    "santalo_upper",
]
