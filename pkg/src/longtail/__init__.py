"""Long-memory linear time series with heavy or light tails: simulation,
closed-form limit-law constants, peaks-over-threshold statistics, and
Monte Carlo certification of the associated central limit theorems.

The package is organized bottom-up:

    stable_numerics   symmetric alpha-stable CDF/PDF/quantiles and sampling
    innovations       innovation families (Gaussian, stable, Student-t)
    linear_process    paths, partial-sum weights, marginal laws
    limit_theory      optimal exponents, limit scales, threshold schedules
    pot_estimators    threshold statistics, centerings, reduction residuals
    mc_harness        replicated experiments, KS checks, rate fits
    service / cli     HTTP and command-line front ends
"""

from .stable_numerics import (
    NumericError,
    StableLaw,
    beta_function,
    sample_sas,
    sas_cdf,
    sas_pdf,
    sas_quantile,
    sas_sf,
)
from .innovations import (
    InnovationSpec,
    innovation_tail,
    moment_index,
    sample_innovations,
    tail_constant,
)
from .linear_process import (
    MarginalLaw,
    ProcessSpec,
    coefficients,
    marginal_law,
    marginal_pdf,
    marginal_quantile,
    marginal_tail,
    partial_sum_power_sum,
    partial_sum_power_sum_infinite,
    partial_sum_remainder_scale,
    partial_sum_sample,
    partial_sum_sample_infinite,
    partial_sum_weights,
    path_to_csv,
    simulate_path,
    truncation_horizon,
)
from .limit_theory import (
    TheoryReport,
    ThresholdSchedule,
    clt_rate,
    gamma_hard_bound,
    k_at,
    kappa,
    limit_scale,
    limit_variance,
    make_schedule,
    optimal_exponents,
    theory_report,
    threshold_at,
)
from .pot_estimators import (
    CenteringTerms,
    PotStatistic,
    centering_terms,
    exceedance_count,
    hill_random,
    hill_sum,
    normalized_statistic,
    order_statistic,
    reduction_residual,
)
from .mc_harness import (
    ConfigError,
    ExperimentConfig,
    ReplicationTable,
    derive_seed,
    ks_distance,
    lr_norm_estimate,
    rate_fit,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "NumericError",
    "StableLaw",
    "beta_function",
    "sample_sas",
    "sas_cdf",
    "sas_pdf",
    "sas_quantile",
    "sas_sf",
    "InnovationSpec",
    "innovation_tail",
    "moment_index",
    "sample_innovations",
    "tail_constant",
    "MarginalLaw",
    "ProcessSpec",
    "coefficients",
    "marginal_law",
    "marginal_pdf",
    "marginal_quantile",
    "marginal_tail",
    "partial_sum_power_sum",
    "partial_sum_power_sum_infinite",
    "partial_sum_remainder_scale",
    "partial_sum_sample",
    "partial_sum_sample_infinite",
    "partial_sum_weights",
    "path_to_csv",
    "simulate_path",
    "truncation_horizon",
    "TheoryReport",
    "ThresholdSchedule",
    "clt_rate",
    "gamma_hard_bound",
    "k_at",
    "kappa",
    "limit_scale",
    "limit_variance",
    "make_schedule",
    "optimal_exponents",
    "theory_report",
    "threshold_at",
    "CenteringTerms",
    "PotStatistic",
    "centering_terms",
    "exceedance_count",
    "hill_random",
    "hill_sum",
    "normalized_statistic",
    "order_statistic",
    "reduction_residual",
    "ConfigError",
    "ExperimentConfig",
    "ReplicationTable",
    "derive_seed",
    "ks_distance",
    "lr_norm_estimate",
    "rate_fit",
    "run_experiment",
    "__version__",
]
