"""Online frequency estimation for noisy sinusoids with slowly varying amplitude.

The package provides a one-parameter sign-adaptive estimator, an adaptive
notch filter baseline, signal generators, frequency-domain predictions and a
scenario harness with CSV reports.
"""

from .analysis import (
    ConvergenceReport,
    SteadyStateHarmonic,
    convergence_report,
    fit_exponential_rate,
    noise_floor,
    omega_gain,
    omega_gain_linear,
    predicted_rate,
    residual_stats,
    residual_variance,
    steady_state_harmonic,
    transfer_E,
    transfer_G,
)
from .anf import AnfParams, AnfState, anf_derivatives, anf_run, anf_step
from .errors import (
    ConfigurationError,
    DomainError,
    FreqTrackError,
    IngestionError,
    NotConvergedError,
    NotEnoughDecayError,
    NumericOverflowError,
    ParseError,
    SignalSpecError,
    UnsupportedKindError,
)
from .estimator import EstimatorParams, EstimatorState, EstimatorTrace, derivatives, run, step
from .io import emit_report, load_csv
from .scenarios import RunArtifact, Scenario, Suite, get_preset, run_scenario, run_suite
from .signals import NoiseSpec, SignalKind, SignalSpec, TimeSeries, amplitude_at, generate, omega_at

__version__ = "0.1.0"
