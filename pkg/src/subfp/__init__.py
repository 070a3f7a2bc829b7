"""Quantitative relaxation for Fokker-Planck equations with weak confinement.

The confining drift grows slower than linearly (<x>^(gamma-1) with gamma
below one), so there is no spectral gap on the whole space: convergence to
the steady state is polynomial or stretched-exponential depending on how
much weight the initial datum carries in its tails.  This package builds
structure-preserving discretizations of such equations, computes their
steady states and spectra, and measures every constant in the decay story:
dissipativity certificates for weighted L^p norms, weak Poincare constants,
fitted decay rates, and the envelopes they must respect.
"""

from .analysis import (
    CellNorm,
    DecayFit,
    DecaySeries,
    EntropySeries,
    InterpolationReport,
    LyapunovReport,
    PoincareReport,
    calibrated_envelope_margin,
    convex_profile,
    decay_series,
    entropy_series,
    envelope_check,
    fit_polynomial_rate,
    fit_stretched_rate,
    interpolation_chain_check,
    lyapunov_check,
    nash_quotient,
    norm_of,
    select_fit_window,
    steady_stiffness,
    weak_poincare_constant,
)
from .config import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    dumps_flat_toml,
    load_config,
    parse_flat_toml,
    save_config,
)
from .discretization import (
    Generator,
    Grid,
    SplitCertificate,
    SplitPair,
    adjoint_generator,
    bernoulli,
    build_generator,
    build_grid,
    default_scan_points,
    export_coo,
    find_splitting_constants,
    split_generator,
)
from .evolution import (
    Trajectory,
    default_probes,
    evolve,
    operator_norm_curve,
    operator_norm_lower_bound,
    step_implicit,
)
from .force_field import (
    ConditionReport,
    ForceField,
    canonical_gradient_field,
    case1_structure_residual,
    default_samples,
    expression_field,
    fd_divergence,
    fd_gradient,
    fd_jacobian,
    rotated_field,
    verify_conditions,
)
from .steady_state import (
    Density,
    SpectrumReport,
    TailReport,
    rightmost_spectrum,
    solve_steady,
    tail_bound_check,
)
from .util import bracket, cutoff, cutoff_profile, log_dirs, radius
from .weights import (
    CriticalExponents,
    DecayEnvelope,
    NormSpec,
    Weight,
    adjoint_dissipation_profile,
    critical_stretch_exponents,
    critical_weight_exponent,
    dissipation_asymptote,
    dissipation_profile,
    envelope_value,
    stretched_rate_limit,
    weighted_lp_norm,
)

__version__ = "0.1.0"

__all__ = [
    "CellNorm", "ConditionReport", "ConfigError", "CriticalExponents",
    "DecayEnvelope", "DecayFit", "DecaySeries", "Density", "EntropySeries",
    "ExperimentConfig", "ForceField", "Generator", "Grid",
    "InterpolationReport", "LyapunovReport", "NormSpec", "PoincareReport",
    "SpectrumReport", "SplitCertificate", "SplitPair", "TailReport",
    "Trajectory", "Weight",
    "adjoint_dissipation_profile", "adjoint_generator", "bernoulli",
    "bracket", "build_generator", "build_grid", "calibrated_envelope_margin",
    "canonical_gradient_field", "case1_structure_residual", "config_from_dict",
    "convex_profile", "critical_stretch_exponents", "critical_weight_exponent",
    "cutoff", "cutoff_profile", "decay_series", "default_probes",
    "default_samples", "default_scan_points", "export_coo", "dissipation_asymptote",
    "dissipation_profile", "dumps_flat_toml", "entropy_series",
    "envelope_check", "envelope_value", "evolve", "expression_field",
    "fd_divergence", "fd_gradient", "fd_jacobian", "find_splitting_constants",
    "fit_polynomial_rate", "fit_stretched_rate", "interpolation_chain_check",
    "load_config", "log_dirs", "lyapunov_check", "nash_quotient", "norm_of",
    "operator_norm_curve", "operator_norm_lower_bound", "parse_flat_toml",
    "radius", "rightmost_spectrum", "rotated_field", "save_config",
    "select_fit_window", "solve_steady", "split_generator", "steady_stiffness",
    "step_implicit", "stretched_rate_limit", "tail_bound_check",
    "verify_conditions", "weak_poincare_constant", "weighted_lp_norm",
]
