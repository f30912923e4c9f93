"""Multivariate self-exciting processes with intermittent observation windows."""

from .core import (
    BoundaryIntensities,
    EvaluationError,
    EventData,
    InvalidArgumentError,
    ModelParams,
    NumericalError,
    WindowSet,
    cif_full,
    cif_gapped,
    integrated_cif_window,
    spectral_radius,
)
from .estimate import (
    BoundaryMode,
    FitConfig,
    FitResult,
    SufficientStats,
    fit,
    fit_mhp,
    objective,
    precompute_stats,
)
from .experiment import ExperimentConfig, MethodSpec, run_experiment
from .simulate import SimConfig, count_histogram, simulate
from .windows import (
    GapConfig,
    common_windows,
    generate_windows,
    independent_windows,
    intersect_windows,
    observed_fraction,
    restrict_events,
    shared_windows,
)

__version__ = "0.1.0"
