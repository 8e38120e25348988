"""Ranking metrics, imbalance groups and group-level summaries."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .prediction import MODEL_NAMES, ScoreSeries
from .timeline import EventTimeline

log = logging.getLogger(__name__)

GROUPS = ("G1", "G2", "G3", "G4")
GROUP_BOUNDS = {
    "G1": (Fraction(0), Fraction(1, 100)),
    "G2": (Fraction(1, 100), Fraction(5, 100)),
    "G3": (Fraction(5, 100), Fraction(10, 100)),
    "G4": (Fraction(10, 100), Fraction(20, 100)),
}
GROUP_LABELS = {"G1": "P<=1%", "G2": "1%<P<=5%", "G3": "5%<P<=10%", "G4": "10%<P<=20%"}
METRICS = ("AUC", "AP")
BASELINE = "NaiveStatic"


def _arrays(scores, labels=None):
    if isinstance(scores, ScoreSeries):
        return scores.scores, scores.labels
    return np.asarray(scores, dtype=np.float64), np.asarray(labels).astype(np.int8)


def roc_auc(series: ScoreSeries | Sequence[float], labels: Sequence[int] | None = None) -> float | None:
    """Mann-Whitney AUC with half credit for ties; None for single-class input."""
    scores, y = _arrays(series, labels)
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)  # average ranks give ties half credit
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(series: ScoreSeries | Sequence[float], labels: Sequence[int] | None = None) -> float | None:
    """Sum over distinct thresholds (descending) of recall increment x precision."""
    scores, y = _arrays(series, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        return None
    order = np.argsort(-scores, kind="mergesort")
    s, yy = scores[order], y[order]
    tp = np.cumsum(yy)
    # last index of each run of equal scores closes a threshold
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp_at = tp[last].astype(np.float64)
    precision = tp_at / (last + 1)
    recall = tp_at / n_pos
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def fraud_proportion(timeline: EventTimeline) -> Fraction:
    return Fraction(timeline.n_frauds, len(timeline)) if len(timeline) else Fraction(0)


def group_of(proportion: Fraction | float) -> str | None:
    p = Fraction(proportion)
    for name, (low, high) in GROUP_BOUNDS.items():
        if low < p <= high:
            return name
    return None


def group_clients(timelines: Iterable[EventTimeline]) -> dict[str, list[EventTimeline]]:
    """Bucket clients by full-timeline fraud proportion; p = 0 and p > 20% are dropped."""
    groups: dict[str, list[EventTimeline]] = {g: [] for g in GROUPS}
    for timeline in timelines:
        name = group_of(fraud_proportion(timeline))
        if name is not None:
            groups[name].append(timeline)
    return groups


def sample_clients(groups: Mapping[str, list[EventTimeline]], size: int | None, seed: int) -> dict[str, list[EventTimeline]]:
    """Seeded sample of at most ``size`` clients per group, in client_id order."""
    rng = np.random.default_rng(seed)
    out = {}
    for name in GROUPS:
        members = sorted(groups.get(name, []), key=lambda t: t.client_id)
        if size is not None and len(members) > size:
            keep = np.sort(rng.choice(len(members), size=size, replace=False))
            members = [members[i] for i in keep]
        out[name] = members
    return out


@dataclass(frozen=True)
class ClientMetrics:
    client_id: str
    group: str
    model_name: str
    auc: float | None
    ap: float | None
    zero_convention: bool = False
    converged: bool = True

    @classmethod
    def from_series(cls, series: ScoreSeries, group: str) -> "ClientMetrics":
        return cls(
            series.client_id, group, series.model_name,
            roc_auc(series), average_precision(series),
            series.zero_convention, series.converged,
        )


@dataclass(frozen=True)
class MetricSummary:
    model_name: str
    group: str
    metric: str
    max: float
    mean: float
    min: float
    std: float
    count: int

    @classmethod
    def from_values(cls, model_name: str, group: str, metric: str, values: Sequence[float]) -> "MetricSummary":
        v = np.asarray(values, dtype=np.float64)
        return cls(model_name, group, metric, float(v.max()), float(v.mean()), float(v.min()), float(v.std(ddof=0)), int(v.size))


@dataclass
class EvaluationReport:
    summaries: list[MetricSummary]
    relative_map: dict[str, dict[str, float]]
    diagnostics: list[str] = field(default_factory=list)
    metadata: dict = field(
        default_factory=lambda: {
            "std": "population (ddof=0)",
            "single_class": "AUC undefined for single-class test segments; AP undefined without positives; such clients are excluded from that cell",
            "relative_map": "(MAP_model - MAP_naive) / MAP_naive",
        }
    )

    def summary(self, model_name: str, group: str, metric: str) -> MetricSummary | None:
        for s in self.summaries:
            if (s.model_name, s.group, s.metric) == (model_name, group, metric):
                return s
        return None

    def to_json(self) -> str:
        return json.dumps(
            {
                "summaries": [asdict(s) for s in self.summaries],
                "relative_map": self.relative_map,
                "diagnostics": self.diagnostics,
                "metadata": self.metadata,
            },
            indent=2,
        )

    def write_summary_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["metric", "group", "model", "max", "mean", "min", "std", "count"])
            for s in self.summaries:
                writer.writerow([s.metric, s.group, s.model_name, s.max, s.mean, s.min, s.std, s.count])

    def write_relative_map_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["model"] + list(GROUPS))
            for model, row in self.relative_map.items():
                writer.writerow([model] + [row.get(g, "") for g in GROUPS])

    def write_plot_data(self, path: str | Path) -> None:
        """Long-format (x, y, series) rows: group, relative MAP, model."""
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["x", "y", "series"])
            for model, row in self.relative_map.items():
                for g in GROUPS:
                    if g in row:
                        writer.writerow([g, row[g], model])


def _rank(names: Sequence[str], value: str) -> tuple[int, str]:
    return (names.index(value) if value in names else len(names), value)


def relative_map_table(mean_ap: Mapping[tuple[str, str], float], baseline: str = BASELINE) -> dict[str, dict[str, float]]:
    """(MAP_model - MAP_baseline) / MAP_baseline for every (model, group) with a baseline."""
    table: dict[str, dict[str, float]] = {}
    for model, group in sorted(mean_ap, key=lambda k: (_rank(MODEL_NAMES, k[0]), _rank(GROUPS, k[1]))):
        base = mean_ap.get((baseline, group))
        if model == baseline or not base:
            continue
        table.setdefault(model, {})[group] = (mean_ap[(model, group)] - base) / base
    return table


def summarize(per_client: Iterable[ClientMetrics]) -> EvaluationReport:
    """Max/mean/min/population-std per (model, group, metric) plus relative MAP."""
    cells: dict[tuple[str, str, str], list[float]] = {}
    seen: set[tuple[str, str]] = set()
    for m in sorted(per_client, key=lambda r: (r.model_name, r.group, r.client_id)):
        seen.add((m.model_name, m.group))
        for metric, value in (("AUC", m.auc), ("AP", m.ap)):
            if value is not None:
                cells.setdefault((m.model_name, m.group, metric), []).append(value)

    def order(key):
        model, group, metric = key
        return (METRICS.index(metric), _rank(GROUPS, group), _rank(MODEL_NAMES, model))

    summaries = []
    diagnostics = []
    for model, group in sorted(seen):
        for metric in METRICS:
            if (model, group, metric) not in cells:
                diagnostics.append(f"no defined {metric} values for {model} in {group}; row omitted")
    for key in sorted(cells, key=order):
        summaries.append(MetricSummary.from_values(key[0], key[1], key[2], cells[key]))
    mean_ap = {(s.model_name, s.group): s.mean for s in summaries if s.metric == "AP"}
    for d in diagnostics:
        log.warning(d)
    return EvaluationReport(summaries, relative_map_table(mean_ap), diagnostics)


DETAIL_COLUMNS = ("client_id", "group", "model", "AUC", "AP", "zero_convention", "converged")


def write_detail_csv(metrics: Iterable[ClientMetrics], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(DETAIL_COLUMNS)
        for m in metrics:
            writer.writerow([
                m.client_id, m.group, m.model_name,
                "" if m.auc is None else m.auc, "" if m.ap is None else m.ap,
                int(m.zero_convention), int(m.converged),
            ])


def read_detail_csv(path: str | Path) -> list[ClientMetrics]:
    out = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            out.append(ClientMetrics(
                row["client_id"], row["group"], row["model"],
                float(row["AUC"]) if row["AUC"] else None,
                float(row["AP"]) if row["AP"] else None,
                row["zero_convention"] == "1", row["converged"] == "1",
            ))
    return out
