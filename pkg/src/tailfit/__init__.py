"""tailfit: extreme-value modeling of parallel-task duration variability.

Simulates parallel writes as the congestion-scaled maximum of independent
per-node service times, fits the generalized extreme value distribution to
observed durations by maximum likelihood, and produces the diagnostic suite
(probability/quantile plots, density overlay, outlier flags) used to judge
the fit.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateSampleError,
    DomainError,
    LogFormatError,
    NotConvergedError,
    ParameterError,
    ProbeError,
    StderrUnavailableError,
)
from .gev import GevParams, Support, gev_cdf, gev_logpdf, gev_pdf, gev_quantile, gev_sample, support
from .fitting import (
    FitOptions,
    FitResult,
    Sample,
    confidence_interval,
    fit_mle,
    initial_params,
    negative_log_likelihood,
)
from .simulate import (
    LatencyModel,
    ObservationSet,
    SimConfig,
    sample_node,
    simulate_campaign,
    simulate_write,
)
from .diagnostics import (
    DiagnosticsReport,
    build_report,
    histogram_density,
    ks_statistic,
    probability_plot,
    quantile_plot,
)
from .probe import ProbeConfig, ProbeRecord, run_probe

__all__ = [
    "__version__",
    "GevParams", "Support", "gev_cdf", "gev_pdf", "gev_logpdf", "gev_quantile",
    "gev_sample", "support",
    "Sample", "FitOptions", "FitResult", "fit_mle", "initial_params",
    "negative_log_likelihood", "confidence_interval",
    "LatencyModel", "SimConfig", "ObservationSet", "sample_node",
    "simulate_write", "simulate_campaign",
    "DiagnosticsReport", "build_report", "probability_plot", "quantile_plot",
    "histogram_density", "ks_statistic",
    "ProbeConfig", "ProbeRecord", "run_probe",
    "ParameterError", "DomainError", "DegenerateSampleError", "LogFormatError",
    "NotConvergedError", "StderrUnavailableError", "ProbeError",
]
