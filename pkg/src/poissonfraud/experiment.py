"""Run the seven scoring models over grouped clients and summarize them."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .estimation import estimate
from .evaluation import ClientMetrics, EvaluationReport, group_clients, sample_clients, summarize
from .prediction import MODEL_NAMES, ScoreSeries, WindowPolicy, parse_model_name, predict_dynamic, predict_naive, predict_static
from .timeline import EventTimeline, SplitSpec, split, split_index

log = logging.getLogger(__name__)


def score_client(
    timeline: EventTimeline,
    models: Sequence[str] = MODEL_NAMES,
    split_spec: SplitSpec = SplitSpec(),
    window: WindowPolicy = WindowPolicy(),
) -> list[ScoreSeries]:
    train, test = split(timeline, split_spec)
    k = split_index(len(timeline), split_spec)
    fits = {}
    out = []
    for name in models:
        family, regime = parse_model_name(name)
        if regime == "naive":
            out.append(predict_naive(train, test))
        elif regime == "static":
            if family not in fits:
                fits[family] = estimate(family, train)
            out.append(predict_static(fits[family], train, test, name))
        else:
            out.append(predict_dynamic(family, timeline, k, window))
    return out


def _score_job(args) -> tuple[str, list[ScoreSeries]]:
    group, timeline, models, split_spec, window = args
    return group, score_client(timeline, models, split_spec, window)


@dataclass
class ExperimentResult:
    report: EvaluationReport
    metrics: list[ClientMetrics]
    series: list[ScoreSeries]
    groups: dict[str, list[str]]


def run_experiment(
    timelines: Iterable[EventTimeline],
    models: Sequence[str] = MODEL_NAMES,
    *,
    split_spec: SplitSpec = SplitSpec(),
    window: WindowPolicy = WindowPolicy(),
    group_sample: int | None = 500,
    seed: int = 0,
    parallelism: int = 1,
) -> ExperimentResult:
    """Group, sample, score and summarize. Output order is deterministic."""
    for name in models:
        parse_model_name(name)
    eligible = [t for t in timelines if len(t) >= 2]
    grouped = sample_clients(group_clients(eligible), group_sample, seed)
    jobs = [(g, t, tuple(models), split_spec, window) for g, members in grouped.items() for t in members]
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_score_job, jobs, chunksize=max(1, len(jobs) // (4 * parallelism))))
    else:
        results = [_score_job(j) for j in jobs]

    metrics: list[ClientMetrics] = []
    series: list[ScoreSeries] = []
    for group, client_series in results:
        for s in client_series:
            series.append(s)
            metrics.append(ClientMetrics.from_series(s, group))
            for d in s.diagnostics:
                log.info("%s %s: %s", s.client_id, s.model_name, d)
    report = summarize(metrics)
    return ExperimentResult(report, metrics, series, {g: [t.client_id for t in m] for g, m in grouped.items()})
