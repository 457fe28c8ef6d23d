"""Repulsive Gaussian mixtures with Selberg Dirichlet weight priors."""

__version__ = "0.1.0"

from .analysis import (
    PosteriorTrace,
    binder_estimate,
    count_allocated,
    elicit_zeta,
    posterior_similarity,
    prior_ma_simulation,
)
from .ensemble import GeParams, ge_log_density, ge_log_norm_const, sample_ge
from .model import (
    Hyperparams,
    MixtureState,
    log_complete_joint,
    log_likelihood,
    shifted_poisson_log_pmf,
    simulate_benchmark,
)
from .sampler import SamplerConfig, StepDiagnostics, run_sampler
from .selberg import (
    GsdirParams,
    SdirParams,
    gsdir_log_density_unnorm,
    internal_dispersion_expectation,
    log_pairwise_repulsion,
    mehta_log_integral,
    sample_sdir,
    sdir_log_density,
    sdir_log_norm_const,
    sdir_moments,
)

__all__ = [
    "__version__",
    "PosteriorTrace",
    "binder_estimate",
    "count_allocated",
    "elicit_zeta",
    "posterior_similarity",
    "prior_ma_simulation",
    "GeParams",
    "ge_log_density",
    "ge_log_norm_const",
    "sample_ge",
    "Hyperparams",
    "MixtureState",
    "log_complete_joint",
    "log_likelihood",
    "shifted_poisson_log_pmf",
    "simulate_benchmark",
    "SamplerConfig",
    "StepDiagnostics",
    "run_sampler",
    "GsdirParams",
    "SdirParams",
    "gsdir_log_density_unnorm",
    "internal_dispersion_expectation",
    "log_pairwise_repulsion",
    "mehta_log_integral",
    "sample_sdir",
    "sdir_log_density",
    "sdir_log_norm_const",
    "sdir_moments",
]
