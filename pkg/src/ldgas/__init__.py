"""Large-deviation functions of linear spectral statistics via Legendre duality.

The package models an interacting log-gas confined by a polynomial potential
(optionally between hard walls), solves its one-cut equilibrium measure, and
turns the tilted-equilibrium map s -> x*(s) into the cumulant generating
function J and the rate function Psi of a polynomial linear statistic.
Finite-size Metropolis sampling closes the loop by checking the continuum
predictions at finite N.
"""

from .errors import (
    ConfigError,
    FlatSegmentError,
    IllConfinedError,
    LdgasError,
    NoConvergenceError,
    NoOneCutError,
    NotAnalyticError,
    PathMismatchError,
)
from .model import (
    ConfinementPotential,
    GasParameters,
    LinearStatistic,
    Polynomial,
    Walls,
    tilt,
)
from .equilibrium import (
    EdgeSingularity,
    EdgeType,
    EquilibriumMeasure,
    SupportInterval,
    density_at,
    euler_lagrange_residual,
    mean_field_energy,
    normalization,
    solve_one_cut,
    statistic_value,
)
from .duality import (
    CumulantReport,
    DomainFlag,
    DualityCurve,
    JointLdf,
    JointSurface,
    RateFunctionTable,
    build_curve,
    cumulants,
    integrate_j,
    integrate_psi,
    invert_curve,
    joint_build_surface,
    joint_integrate,
    legendre_check,
    mixed_partial_asymmetry,
)
from .transitions import (
    CriticalPoint,
    SteepnessReport,
    check_steepness,
    detect_transitions,
)
from .montecarlo import (
    ChainConfig,
    ChainResult,
    TiltedMeanCheck,
    effective_sample_size,
    integrated_autocorr_time,
    run_chain,
    tilted_mean_check,
)

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "ChainResult",
    "ConfigError",
    "ConfinementPotential",
    "CriticalPoint",
    "CumulantReport",
    "DomainFlag",
    "DualityCurve",
    "EdgeSingularity",
    "EdgeType",
    "EquilibriumMeasure",
    "FlatSegmentError",
    "GasParameters",
    "IllConfinedError",
    "JointLdf",
    "JointSurface",
    "LdgasError",
    "LinearStatistic",
    "NoConvergenceError",
    "NoOneCutError",
    "NotAnalyticError",
    "PathMismatchError",
    "Polynomial",
    "RateFunctionTable",
    "SteepnessReport",
    "SupportInterval",
    "TiltedMeanCheck",
    "Walls",
    "build_curve",
    "check_steepness",
    "cumulants",
    "density_at",
    "detect_transitions",
    "effective_sample_size",
    "euler_lagrange_residual",
    "integrate_j",
    "integrate_psi",
    "integrated_autocorr_time",
    "invert_curve",
    "joint_build_surface",
    "joint_integrate",
    "legendre_check",
    "mean_field_energy",
    "mixed_partial_asymmetry",
    "normalization",
    "run_chain",
    "solve_one_cut",
    "statistic_value",
    "tilt",
    "tilted_mean_check",
]
