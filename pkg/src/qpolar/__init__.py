"""Polar duality of convex bodies, Gaussian covariance ellipsoids and symplectic capacities.

Phase-space points are ``z = (x, p)`` with the standard symplectic matrix
``J = [[0, I], [-I, 0]]``. Every module works in units where the action
``hbar`` is an explicit argument (default 1).
"""

from .capacity import capacity_ellipsoid, capacity_quantum_threshold, cmax_product
from .errors import (
    InputError,
    NotQuantumPair,
    PreconditionError,
    QPolarError,
    SubHeisenberg,
    VerificationFailed,
)
from .gaussian import (
    CovState,
    GaussianMixed,
    GaussianPure,
    PhaseEllipsoid,
    project,
    projection_pair_check,
    purity,
    quantum_condition,
)
from .matcore import DEFAULT_TOL, TolerancePolicy
from .polarity import (
    BoxBody,
    CrossPolytopeBody,
    EllipsoidBody,
    Space,
    is_quantum_pair,
    polar_dual,
)
from .reconstruct import max_volume_state, pauli_1d, reconstruct_pair, reconstruct_saturated
from .symplectic import standard_J, symplectic_eigenvalues, williamson

__version__ = "0.1.0"

__all__ = [
    "BoxBody",
    "CovState",
    "CrossPolytopeBody",
    "DEFAULT_TOL",
    "EllipsoidBody",
    "GaussianMixed",
    "GaussianPure",
    "InputError",
    "NotQuantumPair",
    "PhaseEllipsoid",
    "PreconditionError",
    "QPolarError",
    "Space",
    "SubHeisenberg",
    "TolerancePolicy",
    "VerificationFailed",
    "capacity_ellipsoid",
    "capacity_quantum_threshold",
    "cmax_product",
    "is_quantum_pair",
    "max_volume_state",
    "pauli_1d",
    "polar_dual",
    "project",
    "projection_pair_check",
    "purity",
    "quantum_condition",
    "reconstruct_pair",
    "reconstruct_saturated",
    "standard_J",
    "symplectic_eigenvalues",
    "williamson",
]
