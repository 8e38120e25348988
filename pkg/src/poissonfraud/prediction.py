"""Fraud-probability scoring: static fits, rolling-window refits, naive baseline."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .estimation import FitResult, estimate
from .intensity import Family, IntensityModel
from .timeline import EventTimeline

log = logging.getLogger(__name__)

MODEL_NAMES = (
    "HomoStatic",
    "HomoDynamic",
    "LinearStatic",
    "LinearDynamic",
    "QuadraticStatic",
    "QuadraticDynamic",
    "NaiveStatic",
)
_FAMILY_PREFIX = {"Homo": Family.CONSTANT, "Linear": Family.LINEAR, "Quadratic": Family.QUADRATIC}


def parse_model_name(name: str) -> tuple[Family | None, str]:
    """Map e.g. ``LinearDynamic`` to ``(Family.LINEAR, "dynamic")``."""
    if name not in MODEL_NAMES:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    if name == "NaiveStatic":
        return None, "naive"
    for prefix, family in _FAMILY_PREFIX.items():
        if name.startswith(prefix):
            return family, name[len(prefix):].lower()
    raise AssertionError(name)


def model_name(family: Family | str, regime: str) -> str:
    family = Family.parse(family)
    prefix = {v: k for k, v in _FAMILY_PREFIX.items()}[family]
    return prefix + regime.capitalize()


@dataclass(frozen=True)
class WindowPolicy:
    """``expanding`` keeps every past event; ``fixed`` keeps the last ``size``."""

    kind: str = "expanding"
    size: int | None = None

    @classmethod
    def parse(cls, text: str) -> "WindowPolicy":
        text = text.strip().lower()
        if text == "expanding":
            return cls()
        if text.startswith("fixed:"):
            size = int(text.split(":", 1)[1])
            if size < 1:
                raise ValueError("fixed window size must be >= 1")
            return cls("fixed", size)
        raise ValueError(f"bad window policy {text!r}; use 'expanding' or 'fixed:N'")

    def __str__(self) -> str:
        return "expanding" if self.kind == "expanding" else f"fixed:{self.size}"

    def start(self, stop: int) -> int:
        return 0 if self.kind == "expanding" else max(0, stop - int(self.size))


@dataclass(frozen=True, eq=False)
class ScoreSeries:
    client_id: str
    model_name: str
    scores: np.ndarray
    labels: np.ndarray
    zero_convention: bool = False
    converged: bool = True
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        if scores.shape != labels.shape:
            raise ValueError("scores and labels must have equal length")
        if np.any((scores < 0) | (scores > 1)) or not np.all(np.isfinite(scores)):
            raise ValueError("scores must lie in [0, 1]")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.scores.size)

    def rows(self):
        for position, (score, label) in enumerate(zip(self.scores, self.labels)):
            yield self.client_id, self.model_name, position, float(score), int(label)


SCORE_COLUMNS = ("client_id", "model_name", "position", "score", "label")


def write_scores_csv(series: Iterable[ScoreSeries], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SCORE_COLUMNS)
        for s in series:
            writer.writerows((c, m, p, repr(x), y) for c, m, p, x, y in s.rows())


def read_scores_csv(path: str | Path) -> list[ScoreSeries]:
    grouped: dict[tuple[str, str], list[tuple[int, float, int]]] = {}
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            key = (row["client_id"], row["model_name"])
            grouped.setdefault(key, []).append((int(row["position"]), float(row["score"]), int(row["label"])))
    out = []
    for (client, model), items in grouped.items():
        items.sort()
        out.append(ScoreSeries(client, model, [i[1] for i in items], [i[2] for i in items]))
    return out


def fraud_probability(model: IntensityModel, t_prev: float, t_delta: float, *, diagnostics: list | None = None) -> float:
    """P(at least one fraud in (t_prev, t_delta]) = 1 - exp(-(A(t_delta) - A(t_prev))).

    Extrapolation past the model horizon is allowed. A negative compensator
    increment (only possible off the validated horizon) scores 0.
    """
    if t_prev < 0:
        raise ValueError("t_prev must be nonnegative")
    if t_delta < t_prev:
        raise ValueError("t_delta precedes t_prev")
    if model.is_zero:
        return 0.0
    increment = model.compensator(t_delta, extrapolate=True) - model.compensator(t_prev, extrapolate=True)
    if increment < 0:
        if diagnostics is not None:
            diagnostics.append(f"negative compensator increment {increment:.3g} on ({t_prev}, {t_delta}]")
        log.debug("clamping negative compensator increment %g", increment)
        return 0.0
    return float(-math.expm1(-increment))


def _score_gaps(model: IntensityModel, prev: float, times: np.ndarray, diagnostics: list) -> np.ndarray:
    scores = np.empty(times.size)
    for j, t in enumerate(times):
        scores[j] = fraud_probability(model, prev, float(t), diagnostics=diagnostics)
        prev = float(t)
    return scores


def predict_static(fit: FitResult, train: EventTimeline, test: EventTimeline, model_name: str | None = None) -> ScoreSeries:
    """Score every test transaction with one fit; the clock advances on all transactions."""
    if len(test) and len(train) and test.times[0] < train.horizon:
        raise ValueError("test segment starts before the training horizon")
    name = model_name or _static_name(fit.model.family)
    diagnostics: list[str] = []
    scores = _score_gaps(fit.model, train.horizon, test.times, diagnostics)
    return ScoreSeries(
        test.client_id, name, scores, test.labels,
        zero_convention=fit.zero_convention, converged=fit.converged, diagnostics=diagnostics,
    )


def _static_name(family: Family) -> str:
    return model_name(family, "static")


def predict_dynamic(
    family: Family | str,
    full: EventTimeline,
    split_index: int,
    window: WindowPolicy | str = WindowPolicy(),
) -> ScoreSeries:
    """Refit before each test transaction on the window of earlier events.

    Step ``j`` fits on events ``[start, j)`` with horizon ``t[j-1]`` and
    scores ``t[j]`` against ``t[j-1]``. Fixed windows are re-zeroed at their
    first event.
    """
    family = Family.parse(family)
    if isinstance(window, str):
        window = WindowPolicy.parse(window)
    n = len(full)
    if not 1 <= split_index < n:
        raise ValueError("split_index must lie in [1, n)")
    times, labels = full.times, full.labels
    scores = np.zeros(n - split_index)
    diagnostics: list[str] = []
    any_zero = False
    all_converged = True
    for out, j in enumerate(range(split_index, n)):
        start = window.start(j)
        origin = float(times[start]) if start > 0 else 0.0
        segment = EventTimeline(full.client_id, times[start:j] - origin, labels[start:j], float(times[j - 1]) - origin)
        try:
            fit = estimate(family, segment)
        except (ValueError, ArithmeticError) as exc:
            diagnostics.append(f"step {j}: estimation failed ({exc}); scored 0")
            all_converged = False
            continue
        any_zero |= fit.zero_convention
        all_converged &= fit.converged
        if not fit.converged and not fit.zero_convention:
            diagnostics.append(f"step {j}: fit did not converge")
        if fit.model.is_zero:
            continue
        scores[out] = fraud_probability(
            fit.model, float(times[j - 1]) - origin, float(times[j]) - origin, diagnostics=diagnostics
        )
    return ScoreSeries(
        full.client_id, model_name(family, "dynamic"), scores, labels[split_index:],
        zero_convention=any_zero, converged=all_converged, diagnostics=diagnostics,
    )


def predict_naive(train: EventTimeline, test: EventTimeline) -> ScoreSeries:
    """Constant score equal to the training fraud proportion."""
    if len(train) == 0:
        raise ValueError("naive baseline needs a nonempty training segment")
    p = train.n_frauds / len(train)
    return ScoreSeries(test.client_id, "NaiveStatic", np.full(len(test), p), test.labels)
