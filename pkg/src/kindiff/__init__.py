"""Slab transport with an oscillating scattering coefficient, its diffusion
limit, and the numerical verification of the estimates connecting them."""

from .diffusion import (
    DiffusionProblem,
    DiffusionSolution,
    build_limit_problem,
    energy_identity_residual,
    harmonic_face_average,
    solve_fv,
    solve_limit,
)
from .estimates import (
    EstimateReport,
    SmallnessReport,
    SobolevNormResult,
    UniformityReport,
    check_apriori,
    check_crucial,
    check_entropy,
    check_g_eps_uniform,
    check_h_half_condition,
    check_hdiv,
    sobolev_norm,
    standard_checks,
)
from .grid import SlabGrid
from .harness import (
    BracketError,
    ConvergenceReport,
    HarnessError,
    SweepConfig,
    fit_effective_coefficient,
    fit_rate,
    run_sweep,
)
from .scattering import (
    HypothesisReport,
    ScatteringField,
    ScatteringProfile,
    constant_profile,
    harmonic_mean,
    profile_from_csv,
    sinusoidal_profile,
    table_profile,
    two_phase_profile,
    verify_hypotheses,
    weak_star_limit,
)
from .transport import (
    ConvergenceError,
    KineticProblem,
    KineticSolution,
    make_problem,
    solve_steady,
)
from .velocity import VelocityQuadrature, build_quadrature

__all__ = [
    "BracketError",
    "ConvergenceError",
    "ConvergenceReport",
    "DiffusionProblem",
    "DiffusionSolution",
    "EstimateReport",
    "HarnessError",
    "HypothesisReport",
    "KineticProblem",
    "KineticSolution",
    "ScatteringField",
    "ScatteringProfile",
    "SlabGrid",
    "SmallnessReport",
    "SobolevNormResult",
    "SweepConfig",
    "UniformityReport",
    "VelocityQuadrature",
    "build_limit_problem",
    "build_quadrature",
    "check_apriori",
    "check_crucial",
    "check_entropy",
    "check_g_eps_uniform",
    "check_h_half_condition",
    "check_hdiv",
    "constant_profile",
    "energy_identity_residual",
    "fit_effective_coefficient",
    "fit_rate",
    "harmonic_face_average",
    "harmonic_mean",
    "make_problem",
    "profile_from_csv",
    "run_sweep",
    "sinusoidal_profile",
    "sobolev_norm",
    "solve_fv",
    "solve_limit",
    "solve_steady",
    "standard_checks",
    "table_profile",
    "two_phase_profile",
    "verify_hypotheses",
    "weak_star_limit",
]

__version__ = "0.1.0"
