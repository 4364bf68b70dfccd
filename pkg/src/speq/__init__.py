"""speq: two-sample equality testing for spectral densities.

Given two zero-mean stationary Gaussian series, possibly of different
lengths, the package tests whether they share one spectral density
(equivalently, one covariance structure).  Both series are mapped onto a
common grid through squared DCT-I coefficients, binning and a
variance-stabilizing log transform; the log-densities are estimated with a
periodic smoothing spline; and the mean squared difference of the estimates
is calibrated against resampled pairs drawn from the density estimated on
the longer series.
"""

__version__ = "0.1.0"

from .equality import (
    FixedBandwidths,
    TestConfig,
    TestOutcome,
    critical_value,
    empirical_pvalue,
    estimate_pooled_sdf,
    mc_null_sample,
    run_test,
    statistic,
)
from .experiments import (
    SCENARIO_BINS,
    SCENARIOS,
    ExperimentConfig,
    PowerCurve,
    RocCurve,
    default_test_config,
    run_power_curve,
    run_roc,
    run_type1,
)
from .models import (
    AR1,
    AR2,
    MA1,
    Autocovariance,
    CosinePower,
    Mixture,
    QuadratureError,
    SpectralModel,
    Tabulated,
    autocovariance,
    constant_model,
    eval_sdf,
    make_setting,
    model_from_dict,
    setting_penalty_order,
)
from .simulate import (
    CirculantSampler,
    SamplerState,
    covariance_matrix,
    derive_seed,
    sample_series,
)
from .smoother import (
    BandwidthSearch,
    LogSdfEstimate,
    SmootherSpec,
    default_bandwidth_grid,
    eigenvalues,
    gcv_score,
    gml_score,
    kappa_sequence,
    select_bandwidth,
    smooth,
    smooth_at,
)
from .transform import (
    BinningPlan,
    DegenerateSeriesError,
    TransformedSample,
    bin_coefficients,
    coefficient_frequencies,
    dct1,
    digamma,
    plan_bins,
    squared_coefficients,
    transform,
)

__all__ = [
    "__version__",
    # models
    "SpectralModel", "AR1", "AR2", "MA1", "CosinePower", "Mixture", "Tabulated",
    "Autocovariance", "QuadratureError", "constant_model", "eval_sdf",
    "autocovariance", "make_setting", "setting_penalty_order", "model_from_dict",
    # simulation
    "SamplerState", "CirculantSampler", "covariance_matrix", "sample_series",
    "derive_seed",
    # transform
    "BinningPlan", "TransformedSample", "DegenerateSeriesError", "dct1",
    "squared_coefficients", "coefficient_frequencies", "plan_bins",
    "bin_coefficients", "digamma", "transform",
    # smoother
    "SmootherSpec", "LogSdfEstimate", "BandwidthSearch", "kappa_sequence",
    "eigenvalues", "smooth", "smooth_at", "gcv_score", "gml_score",
    "select_bandwidth", "default_bandwidth_grid",
    # equality test
    "TestConfig", "TestOutcome", "FixedBandwidths", "statistic",
    "empirical_pvalue", "critical_value", "estimate_pooled_sdf",
    "mc_null_sample", "run_test",
    # experiments
    "ExperimentConfig", "PowerCurve", "RocCurve", "SCENARIOS", "SCENARIO_BINS",
    "default_test_config", "run_type1", "run_power_curve", "run_roc",
]
