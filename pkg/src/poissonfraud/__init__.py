"""Fraud scoring with constant, linear and quadratic Poisson intensities."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .estimation import FitResult, estimate, estimate_hpp, estimate_nhpp, log_likelihood, maximize_log_likelihood
from .evaluation import (
    ClientMetrics,
    EvaluationReport,
    MetricSummary,
    average_precision,
    group_clients,
    relative_map_table,
    roc_auc,
    summarize,
)
from .intensity import Family, IntensityModel, compensator, evaluate, feasible, feasible_region_grid
from .prediction import (
    MODEL_NAMES,
    ScoreSeries,
    WindowPolicy,
    fraud_probability,
    predict_dynamic,
    predict_naive,
    predict_static,
)
from .simulation import SimSpec, simulate_dataset, simulate_hpp, simulate_nhpp
from .timeline import EventTimeline, SplitSpec, fraud_times, ingest_csv, split

__all__ = [
    "BACKEND",
    "ClientMetrics",
    "EvaluationReport",
    "EventTimeline",
    "Family",
    "FitResult",
    "IntensityModel",
    "MODEL_NAMES",
    "MetricSummary",
    "ScoreSeries",
    "SimSpec",
    "SplitSpec",
    "WindowPolicy",
    "average_precision",
    "compensator",
    "estimate",
    "estimate_hpp",
    "estimate_nhpp",
    "evaluate",
    "feasible",
    "feasible_region_grid",
    "fraud_probability",
    "fraud_times",
    "group_clients",
    "ingest_csv",
    "log_likelihood",
    "maximize_log_likelihood",
    "predict_dynamic",
    "predict_naive",
    "predict_static",
    "relative_map_table",
    "roc_auc",
    "simulate_dataset",
    "simulate_hpp",
    "simulate_nhpp",
    "split",
    "summarize",
]
