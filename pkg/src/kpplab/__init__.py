"""Numerical toolkit for linearly coupled KPP systems.

Core objects: :class:`~kpplab.model.Model` (diffusivities, coupling matrix,
competition field) and the spectral machinery built on it — principal
values/vectors, decay-rate dispersion, minimal front speeds, absorbing
bounds, constant equilibria, truncated traveling waves, and a line
simulator for cross-validating spreading speeds.
"""
from .dispersion import (BoundCheck, DispersionCurve, SpeedReport,
                         dispersion_curve, kappa, minimal_speed, mu_roots,
                         require_supercritical, speed_bounds_check)
from .errors import (BracketingViolation, ConfigError, FrontAtBoundary,
                     HypothesisViolation, InsufficientSamples, KppLabError,
                     NoConvergence, PositivityBreach, SamplingInconclusive,
                     SpeedBelowCritical, StabilityBudgetExceeded)
from .model import (Custom, GrossPitaevskii, LotkaVolterra, Model,
                    SaturationData, ValidationReport, absorbing_bound,
                    alpha_half, model_from_dict, model_from_json,
                    model_to_dict, model_to_json, reaction,
                    reaction_jacobian, saturation_vector, validate)
from .simulate import (FrontTrace, Grid1D, RunResult, SimState,
                       front_position, initial_bump, initial_constant,
                       initial_front, make_state, measure_spreading_speed,
                       run, step)
from .spectral import (DirichletResult, SpectralPair,
                       check_essentially_nonnegative_irreducible,
                       dirichlet_principal_eigenvalue, generalized_lambda1,
                       perron_frobenius)
from .steady import SteadyState, find_constant_steady, \
    nonexistence_certificate
from .waves import (WaveEnvelope, WaveProfile, build_envelope,
                    default_domain, solve_truncated, super_solution,
                    wave_diagnostics)
from .zoo import gurtin_maccamy, laplacian_matrix, toads_local, \
    toads_nonlocal

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "Model", "LotkaVolterra", "GrossPitaevskii", "Custom",
    "SaturationData", "ValidationReport", "validate", "reaction",
    "reaction_jacobian", "saturation_vector", "alpha_half",
    "absorbing_bound", "model_to_dict", "model_from_dict", "model_to_json",
    "model_from_json",
    # spectral
    "SpectralPair", "DirichletResult", "perron_frobenius",
    "check_essentially_nonnegative_irreducible",
    "dirichlet_principal_eigenvalue", "generalized_lambda1",
    # dispersion
    "SpeedReport", "DispersionCurve", "BoundCheck", "kappa",
    "minimal_speed", "mu_roots", "dispersion_curve", "speed_bounds_check",
    "require_supercritical",
    # simulate
    "Grid1D", "SimState", "RunResult", "FrontTrace", "make_state", "step",
    "run", "front_position", "measure_spreading_speed", "initial_front",
    "initial_constant", "initial_bump",
    # waves
    "WaveEnvelope", "WaveProfile", "super_solution", "build_envelope",
    "default_domain", "solve_truncated", "wave_diagnostics",
    # steady
    "SteadyState", "find_constant_steady", "nonexistence_certificate",
    # zoo
    "laplacian_matrix", "toads_local", "toads_nonlocal", "gurtin_maccamy",
    # errors
    "KppLabError", "HypothesisViolation", "NoConvergence",
    "SamplingInconclusive", "PositivityBreach", "StabilityBudgetExceeded",
    "InsufficientSamples", "SpeedBelowCritical", "BracketingViolation",
    "FrontAtBoundary", "ConfigError",
]
