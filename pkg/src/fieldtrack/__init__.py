"""Simulation suite for Bayesian tracking of a drifting frequency with a qubit sensor."""

__version__ = "0.1.0"

from .circular import (CircularDistribution, CoefficientCapError,
                       DegenerateLikelihoodError, UndefinedEstimateError)
from .wiener import (EventTruthPath, GridTruthPath, SignalModel,
                     export_waveform_csv, make_truth_path)
from .sensor import SensorParams, outcome_probability, simulate_ramsey
from .protocol import (FixedK, ProtocolConfig, ScanK, TrajectoryRecord,
                       choose_k, diffusion_matched_k, repetitions,
                       run_non_tracking, run_tracking, sequence_budget)
from .sweep import (PowerLawFit, SweepConfig, SweepResult, estimation_sigma,
                    eta, fit_power_law, run_sweep, waveform_error,
                    write_results_csv, read_results_csv)

__all__ = [
    "CircularDistribution", "CoefficientCapError", "DegenerateLikelihoodError",
    "UndefinedEstimateError", "EventTruthPath", "GridTruthPath", "SignalModel",
    "export_waveform_csv", "make_truth_path", "SensorParams",
    "outcome_probability", "simulate_ramsey", "FixedK", "ProtocolConfig",
    "ScanK", "TrajectoryRecord", "choose_k", "diffusion_matched_k",
    "repetitions", "run_non_tracking", "run_tracking", "sequence_budget",
    "PowerLawFit", "SweepConfig", "SweepResult", "estimation_sigma", "eta",
    "fit_power_law", "run_sweep", "waveform_error", "write_results_csv",
    "read_results_csv",
]
