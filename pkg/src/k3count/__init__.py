"""Exact lattice-point counts for stability-condition and twistor regions.

The package counts integer classes v with |Z(v)| <= R under a Bridgeland-type
central charge (and the Lagrangian / twistor-plane variants of the same
region), entirely in exact arithmetic, and compares the normalized counts
N(R)/R^d against their closed-form leading coefficients.
"""

from .analytic import (
    CoefficientResult,
    SeminormRegionSpec,
    StabilityRegionSpec,
    adaptive_simpson,
    ball_volume,
    coefficient_gl,
    coefficient_phase1,
    coefficient_slag,
    coefficient_slag_general,
    gamma_half,
    mc_volume,
    shear_integral,
    shear_integral_rho2,
)
from .charges import (
    ChargeValue,
    GLPlusElement,
    MukaiVector,
    StabilityCharge,
    apply_gl,
    central_charge,
    decompose_gl,
    genericity_check,
    mukai_vector,
    systole_estimate,
)
from .counting import (
    CountReport,
    MajorantForm,
    SweepResult,
    brute_force_box_count,
    build_majorant,
    convergence_sweep,
    count_region,
    count_semistable,
    enumerate_majorant,
)
from .errors import BudgetError, InputError, K3CountError, WallViolationError
from .lattices import (
    IntegerLattice,
    Sublattice,
    hyperbolic_sum,
    orthogonal_complement,
    standard_lattice,
)
from .slag import (
    PlaneInvarianceReport,
    SlagForm,
    TwistorPlane,
    brute_force_twistor_count,
    lagrangian_lattice,
    plane_invariance_check,
    slag_count,
    twistor_count,
    twistor_seminorm,
    twistor_seminorm_sq,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ChargeValue",
    "CoefficientResult",
    "CountReport",
    "GLPlusElement",
    "InputError",
    "IntegerLattice",
    "K3CountError",
    "MajorantForm",
    "MukaiVector",
    "PlaneInvarianceReport",
    "SeminormRegionSpec",
    "SlagForm",
    "StabilityCharge",
    "StabilityRegionSpec",
    "Sublattice",
    "SweepResult",
    "TwistorPlane",
    "WallViolationError",
    "apply_gl",
    "ball_volume",
    "brute_force_box_count",
    "brute_force_twistor_count",
    "build_majorant",
    "central_charge",
    "coefficient_gl",
    "coefficient_phase1",
    "coefficient_slag",
    "coefficient_slag_general",
    "convergence_sweep",
    "count_region",
    "count_semistable",
    "decompose_gl",
    "enumerate_majorant",
    "adaptive_simpson",
    "gamma_half",
    "genericity_check",
    "hyperbolic_sum",
    "lagrangian_lattice",
    "mc_volume",
    "shear_integral",
    "shear_integral_rho2",
    "mukai_vector",
    "orthogonal_complement",
    "plane_invariance_check",
    "slag_count",
    "standard_lattice",
    "systole_estimate",
    "twistor_count",
    "twistor_seminorm",
    "twistor_seminorm_sq",
]
