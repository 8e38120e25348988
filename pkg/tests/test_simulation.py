import json

import numpy as np
import pytest
from scipy import stats

from poissonfraud.intensity import IntensityModel
from poissonfraud.simulation import (
    GROUP_TARGETS,
    SimSpec,
    group_specs,
    make_rng,
    simulate_client,
    simulate_dataset,
    simulate_hpp,
    simulate_nhpp,
    write_dataset,
)
from poissonfraud.timeline import ingest_csv


def test_hpp_count_and_uniformity():
    times = simulate_hpp(5.0, 200.0, seed=1)
    assert abs(times.size - 1000) < 4 * np.sqrt(1000)
    assert np.all(np.diff(times) > 0) and times[-1] <= 200.0
    assert stats.kstest(times / 200.0, "uniform").pvalue > 1e-3


def test_nhpp_time_change_is_uniform():
    # under the true compensator, A(t_i)/A(T) are iid uniform given the count
    model = IntensityModel("quadratic", [0.5, -0.008, 0.0004], 50.0)
    transformed = np.concatenate([
        model.compensator(simulate_nhpp(model, seed)) / model.compensator(50.0) for seed in range(500)
    ])
    assert stats.kstest(transformed, "uniform").pvalue > 1e-3


def test_nhpp_mean_count_matches_compensator():
    model = IntensityModel("linear", [1.0, 0.5], 50.0)
    counts = [simulate_nhpp(model, seed).size for seed in range(500)]
    expected = model.compensator(50.0)
    assert abs(np.mean(counts) - expected) < 4 * np.sqrt(expected / 500)


def test_infeasible_model_rejected():
    with pytest.raises(ValueError):
        simulate_nhpp(IntensityModel("linear", [1.0, -1.0], 5.0))


def test_determinism_and_independence():
    a = simulate_hpp(1.0, 50.0, seed=4)
    assert np.array_equal(a, simulate_hpp(1.0, 50.0, seed=4))
    assert not np.array_equal(a, simulate_hpp(1.0, 50.0, seed=5))
    r1 = make_rng(7, 0).uniform(size=3)
    r2 = make_rng(7, 1).uniform(size=3)
    assert not np.allclose(r1, r2)


def _spec(**kw):
    base = dict(n_clients=5, genuine_rate=2.0, fraud_model=IntensityModel("constant", [0.1], 30.0), horizon_days=30.0, seed=3)
    base.update(kw)
    return SimSpec(**base)


@pytest.mark.parametrize("labeling", ["merge", "attach"])
def test_client_structure(labeling):
    tl = simulate_client(_spec(labeling=labeling), 2)
    assert tl.times[0] == 0.0 and tl.labels[0] == 0
    assert np.all(np.diff(tl.times) > 0)
    assert tl.client_id == "C00002"
    # clients are reproducible individually
    assert np.array_equal(tl.times, simulate_client(_spec(labeling=labeling), 2).times)


def test_attach_labels_follow_gap_probability():
    lam = 0.3
    spec = _spec(n_clients=200, fraud_model=IntensityModel("constant", [lam], 30.0), labeling="attach")
    gaps, labels = [], []
    for tl in simulate_dataset(spec):
        gaps.append(np.diff(tl.times))
        labels.append(tl.labels[1:])
    gaps, labels = np.concatenate(gaps), np.concatenate(labels)
    expected = np.sum(1 - np.exp(-lam * gaps))
    assert abs(labels.sum() - expected) < 4 * np.sqrt(expected)


def test_spec_validation_and_round_trip():
    spec = _spec()
    assert SimSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    with pytest.raises(ValueError):
        _spec(labeling="other")
    with pytest.raises(ValueError):
        _spec(genuine_rate=0.0)


def test_write_dataset_round_trip(tmp_path):
    spec = _spec()
    timelines = simulate_dataset(spec)
    csv_path, manifest = write_dataset(timelines, [spec], tmp_path, "sim")
    back = ingest_csv(csv_path)
    assert [t.client_id for t in back] == [t.client_id for t in timelines]
    for a, b in zip(back, timelines):
        np.testing.assert_allclose(a.times, b.times, atol=1e-9)
        assert np.array_equal(a.labels, b.labels)
    meta = json.loads(manifest.read_text())
    assert meta["rng"] == "numpy.random.Philox"
    assert SimSpec.from_dict(meta["specs"][0]) == spec


def test_group_specs_hit_target_proportions():
    specs = group_specs(40, seed=2, frauds_per_client=12)
    for spec, (group, p) in zip(specs, GROUP_TARGETS.items()):
        tls = simulate_dataset(spec)
        frac = sum(t.n_frauds for t in tls) / sum(len(t) for t in tls)
        assert frac == pytest.approx(p, rel=0.2), group
        assert tls[0].client_id.startswith(group)
