"""Simultaneous inference for high dimensional means from heavy-tailed data.

The pipeline: truncate the data element-wise at a level chosen from a plug-in
moment estimate, calibrate the sup-norm cutoff by permutation half-sampling
(no covariance estimation), and solve each coordinate's monotone score
equation exactly for the interval endpoints. A Gaussian reference sampler and
Kolmogorov-distance diagnostics quantify how well the max statistic is
approximated.
"""

from .datagen import (
    DistributionSpec,
    generate,
    pareto_log_variance,
    true_covariance_model,
)
from .estimator import TruncatedMeanSCI
from .exceptions import (
    DataFormatError,
    InfeasibleCutoffError,
    InvalidCovarianceError,
    InvalidParameterError,
    NoSolutionError,
)
from .experiments import coverage_study, ga_study
from .gaussian import (
    CovarianceModel,
    GaDiagnostics,
    ks_two_sample,
    oracle_cutoff,
    sample_gaussian_max,
    theory_diagnostics,
)
from .quantiles import upper_quantile
from .resampling import (
    ResampleDistribution,
    ResamplePlan,
    empirical_quantile,
    half_sample_diffs,
    resample_distribution,
)
from .sci import (
    SciResult,
    TestDecision,
    build_sci,
    huber_estimate,
    score_function,
    solve_level,
    test_mean,
)
from .truncation import (
    MeanEstimate,
    TruncationSpec,
    estimate_moment_bound,
    plain_mean,
    select_kappa,
    truncate,
    truncated_mean,
)

__version__ = "0.1.0"

__all__ = [
    "CovarianceModel",
    "DataFormatError",
    "DistributionSpec",
    "GaDiagnostics",
    "InfeasibleCutoffError",
    "InvalidCovarianceError",
    "InvalidParameterError",
    "MeanEstimate",
    "NoSolutionError",
    "ResampleDistribution",
    "ResamplePlan",
    "SciResult",
    "TestDecision",
    "TruncatedMeanSCI",
    "TruncationSpec",
    "build_sci",
    "coverage_study",
    "empirical_quantile",
    "estimate_moment_bound",
    "ga_study",
    "generate",
    "half_sample_diffs",
    "huber_estimate",
    "ks_two_sample",
    "oracle_cutoff",
    "pareto_log_variance",
    "plain_mean",
    "resample_distribution",
    "sample_gaussian_max",
    "score_function",
    "select_kappa",
    "solve_level",
    "test_mean",
    "theory_diagnostics",
    "true_covariance_model",
    "truncate",
    "truncated_mean",
    "upper_quantile",
]
