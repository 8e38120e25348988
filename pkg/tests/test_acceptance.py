"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test prints (and records for the terminal summary) one line of the form
``criterion N: PASS|FAIL <details>``.
"""

import math
import time

import numpy as np
import pytest

from poissonfraud.estimation import estimate_hpp, log_likelihood, maximize_log_likelihood
from poissonfraud.evaluation import GROUPS, MetricSummary, average_precision, relative_map_table, roc_auc
from poissonfraud.experiment import run_experiment, score_client
from poissonfraud.intensity import IntensityModel, feasible_region_grid
from poissonfraud.prediction import MODEL_NAMES, fraud_probability, predict_dynamic, predict_static, predict_naive
from poissonfraud.estimation import estimate
from poissonfraud.simulation import SimSpec, group_specs, simulate_dataset, simulate_hpp, simulate_nhpp
from poissonfraud.timeline import EventTimeline, SplitSpec, fraud_times, split

import conftest
from published_values import GROUPS as PUBLISHED_GROUPS, RELATIVE_MAP, mean_ap_cells
from test_evaluation import ap_oracle, auc_oracle

POISSON_MODELS = [m for m in MODEL_NAMES if m != "NaiveStatic"]


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_1_relative_map_table():
    with Timer() as t:
        table = relative_map_table(mean_ap_cells())
        worst = max(
            abs(table[m][g] - expected)
            for m, row in RELATIVE_MAP.items()
            for g, expected in zip(PUBLISHED_GROUPS, row)
        )
        n = sum(len(row) for row in table.values())
    report(1, n == 24 and worst <= 1e-3 and t.elapsed < 1.0,
           f"24 entries, max |diff| = {worst:.2e} (tol 1e-3), {t.elapsed:.3f}s")


def test_criterion_2_toy_example():
    with Timer() as t:
        toy = EventTimeline.from_events("toy", np.arange(9.0), [0, 0, 0, 0, 0, 0, 1, 0, 0])
        train, test = toy.segment(0, 6), toy.segment(6, 9)
        aucs = {}
        for family, prefix in (("constant", "Homo"), ("linear", "Linear"), ("quadratic", "Quadratic")):
            aucs[prefix + "Static"] = roc_auc(predict_static(estimate(family, train), train, test))
            aucs[prefix + "Dynamic"] = roc_auc(predict_dynamic(family, toy, 6))
    ok = all(v == (0.0 if k.endswith("Dynamic") else 0.5) for k, v in aucs.items()) and t.elapsed < 1.0
    report(2, ok, f"{aucs}, {t.elapsed:.3f}s")


def test_criterion_3_naive_auc():
    with Timer() as t:
        spec = SimSpec(800, 0.3, IntensityModel("constant", [0.03], 365.0), 365.0, seed=3, labeling="attach")
        values = []
        for timeline in simulate_dataset(spec):
            if len(values) == 500:
                break
            if len(timeline) < 2:
                continue
            train, test = split(timeline)
            if 0 < test.n_frauds < len(test) and len(train):
                values.append(roc_auc(predict_naive(train, test)))
        summary = MetricSummary.from_values("NaiveStatic", "all", "AUC", values)
    ok = summary.count == 500 and summary.mean == 0.5 and summary.std == 0.0 and t.elapsed < 10
    report(3, ok, f"{summary.count} mixed-class clients, mean {summary.mean}, std {summary.std}, {t.elapsed:.2f}s")


def test_criterion_4_hpp_recovery():
    with Timer() as t:
        errors = []
        equivariant = True
        for seed in range(100):
            tau = simulate_hpp(5.0, 200.0, seed)
            base = EventTimeline("c", tau, np.ones(tau.size, dtype=np.int8), 200.0)
            lam = estimate_hpp(base).model.params[0]
            errors.append(abs(lam - 5.0) / 5.0)
            for s in (0.25, 3.0, 86400.0):
                scaled = EventTimeline("c", tau * s, base.labels, 200.0 * s)
                if not math.isclose(estimate_hpp(scaled).model.params[0] * s, lam, rel_tol=1e-12):
                    equivariant = False
        median = float(np.median(errors))
    report(4, median < 0.05 and equivariant and t.elapsed < 10,
           f"median rel err {median:.4f} (tol 0.05), equivariance {'exact' if equivariant else 'broken'}, {t.elapsed:.2f}s")


def grid_oracle(tau, T, n=200):
    """Best log-likelihood over an n x n lattice covering the feasible (a, b) set near the optimum."""
    k = len(tau)
    tau = np.asarray(tau)
    a_hi = 2.0 * k / T
    b_hi = 2.0 * k / T**2
    best = -np.inf
    for a in np.linspace(0.0, a_hi, n):
        b = np.linspace(-a / T, b_hi, n)
        lam = a + np.outer(b, tau)
        ll = -(a * T + b * T * T / 2.0) + np.sum(np.log(np.maximum(lam, 1e-12)), axis=1)
        best = max(best, float(ll.max()))
    return best


def test_criterion_5_nhpp_recovery():
    truth = IntensityModel("linear", [1.0, 0.5], 50.0)
    with Timer() as t:
        err_a, err_b = [], []
        small, oracle_ok = 0, True
        for seed in range(100):
            tau = simulate_nhpp(truth, seed)
            fit = maximize_log_likelihood("linear", tau, 50.0)
            a, b = fit.model.params
            err_a.append(abs(a - 1.0) / 1.0)
            err_b.append(abs(b - 0.5) / 0.5)
            if tau.size <= 20:
                small += 1
                oracle_ok &= fit.log_likelihood >= grid_oracle(tau, 50.0) - 1e-3
        # the truth above never yields <= 20 events, so exercise the oracle
        # check on the same intensity over short horizons as well
        short = IntensityModel("linear", [1.0, 0.5], 5.0)
        for seed in range(100):
            tau = simulate_nhpp(short, 1000 + seed)
            if 1 <= tau.size <= 20:
                small += 1
                fit = maximize_log_likelihood("linear", tau, 5.0)
                oracle_ok &= fit.log_likelihood >= grid_oracle(tau, 5.0) - 1e-3
    med_a, med_b = float(np.median(err_a)), float(np.median(err_b))
    ok = med_a < 0.15 and med_b < 0.15 and oracle_ok and t.elapsed < 120
    report(5, ok, f"median rel err a {med_a:.3f}, b {med_b:.3f} (tol 0.15); "
                  f"grid oracle {'ok' if oracle_ok else 'violated'} on {small} small instances, {t.elapsed:.1f}s")


def test_criterion_6_metric_oracles():
    rng = np.random.default_rng(6)
    with Timer() as t:
        auc_ok = ap_ok = True
        for _ in range(1000):
            n = int(rng.integers(1, 13))
            scores = rng.choice([0.0, 0.1, 0.3, 0.5, 0.7, 1.0], n) if rng.uniform() < 0.5 else rng.uniform(size=n)
            labels = rng.integers(0, 2, n)
            want_auc, want_ap = auc_oracle(list(scores), list(labels)), ap_oracle(list(scores), list(labels))
            got_auc, got_ap = roc_auc(scores, labels), average_precision(scores, labels)
            auc_ok &= (want_auc is None and got_auc is None) or (want_auc is not None and got_auc == float(want_auc))
            ap_ok &= (want_ap is None and got_ap is None) or (want_ap is not None and abs(got_ap - float(want_ap)) <= 1e-12)
    report(6, auc_ok and ap_ok and t.elapsed < 10, f"1000 series: AUC exact {auc_ok}, AP 1e-12 {ap_ok}, {t.elapsed:.2f}s")


def test_criterion_7_nesting():
    spec = SimSpec(200, 0.5, IntensityModel("linear", [0.01, 0.0002], 365.0), 365.0, seed=7, labeling="merge")
    with Timer() as t:
        checked = violations = 0
        for timeline in simulate_dataset(spec):
            if len(timeline) < 2:
                continue
            train, _ = split(timeline)
            tau = fraud_times(train)
            if tau.size == 0:
                continue
            T = train.horizon
            k = tau.size
            ll_c = log_likelihood("constant", [k / T], tau, T)  # closed-form maximizer
            ll_l = maximize_log_likelihood("linear", tau, T).log_likelihood
            ll_q = maximize_log_likelihood("quadratic", tau, T).log_likelihood
            checked += 1
            if not (ll_q >= ll_l - 1e-6 and ll_l >= ll_c - 1e-6):
                violations += 1
    report(7, checked >= 100 and violations == 0 and t.elapsed < 60,
           f"{checked} clients with training frauds, {violations} violations, {t.elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_8_qualitative_reproduction():
    with Timer() as t:
        timelines = [tl for spec in group_specs(300, seed=1) for tl in simulate_dataset(spec)]
        result = run_experiment(timelines, group_sample=200, seed=1)
    rep = result.report
    sizes = {g: len(ids) for g, ids in result.groups.items()}
    mean_ap = {(m, g): rep.summary(m, g, "AP").mean for m in MODEL_NAMES for g in GROUPS}
    beats_naive = all(mean_ap[(m, g)] > mean_ap[("NaiveStatic", g)] for m in POISSON_MODELS for g in GROUPS)
    static_wins = [
        (prefix, g, mean_ap[(prefix + "Static", g)], mean_ap[(prefix + "Dynamic", g)])
        for prefix in ("Homo", "Linear", "Quadratic") for g in GROUPS
    ]
    static_ok = all(s >= d for _, _, s, d in static_wins)
    rel = rep.relative_map
    monotone = all(rel[m][a] > rel[m][b] for m in POISSON_MODELS for a, b in zip(GROUPS, GROUPS[1:]))
    for m in POISSON_MODELS:
        print(m, {g: round(rel[m][g], 3) for g in GROUPS})
    ok = all(v == 200 for v in sizes.values()) and beats_naive and static_ok and monotone and t.elapsed < 600
    worst = min(static_wins, key=lambda r: r[2] - r[3])
    report(8, ok, f"groups {sizes}; (a) {beats_naive}; (b) {static_ok} (tightest {worst[0]} {worst[1]}: "
                  f"{worst[2]:.4f} vs {worst[3]:.4f}); (c) {monotone}; {t.elapsed:.0f}s")


def test_criterion_9_region_containment():
    with Timer() as t:
        grids = {T: feasible_region_grid("linear", 10.0, 100.0, T, 201) for T in (0.02, 0.2, 20.0)}
        small_in_mid = not np.any(grids[20.0].feasible & ~grids[0.2].feasible)
        mid_in_large = not np.any(grids[0.2].feasible & ~grids[0.02].feasible)
        strict = grids[20.0].feasible.sum() < grids[0.2].feasible.sum() < grids[0.02].feasible.sum()
    counts = {T: int(g.feasible.sum()) for T, g in grids.items()}
    report(9, small_in_mid and mid_in_large and strict and t.elapsed < 5,
           f"feasible cells {counts}, nested {small_in_mid and mid_in_large}, {t.elapsed:.3f}s")


def test_criterion_10_probability_bounds():
    rng = np.random.default_rng(10)
    with Timer() as t:
        in_range = zero_gap = True
        for _ in range(2000):
            T = rng.uniform(0.1, 100)
            a = rng.uniform(0, 5)
            b = rng.uniform(-a / T, 1)
            c = rng.uniform(0, 0.1)
            model = IntensityModel("quadratic", [a, b, c], T)
            t0 = rng.uniform(0, 2 * T)
            p = fraud_probability(model, t0, t0 + rng.exponential(T))
            in_range &= 0.0 <= p <= 1.0
            zero_gap &= fraud_probability(model, t0, t0) == 0.0
        limit = True
        for lam in (1e-3, 0.5, 7.0, 1e3):
            model = IntensityModel("constant", [lam], 1.0)
            limit &= fraud_probability(model, 0.0, 1e6 / lam) >= 1 - 1e-9
    report(10, in_range and zero_gap and limit and t.elapsed < 1,
           f"in [0,1] {in_range}, zero gap {zero_gap}, limit {limit}, {t.elapsed:.3f}s")
