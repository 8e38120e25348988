"""Synthetic transaction streams with a known fraud intensity.

Each client's stream starts with an account-opening transaction at day 0,
followed by genuine transactions from a homogeneous process. Fraud arrivals
come from a (possibly non-homogeneous) process drawn by thinning and enter
the stream in one of two ways:

``merge``
    every fraud arrival is its own transaction labelled 1;
``attach``
    transactions are the genuine arrivals only, and a transaction is labelled
    1 when at least one fraud arrival fell since the previous transaction.
    Under this labelling 1 - exp(-(A(t_j) - A(t_{j-1}))) is exactly the
    probability that transaction j is fraudulent.

All randomness comes from Philox generators keyed on ``(seed, client_index)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .intensity import Family, IntensityModel
from .timeline import EventTimeline, write_csv

RNG_NAME = "numpy.random.Philox"
LABELINGS = ("merge", "attach")


def make_rng(seed, *keys: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def _hpp_arrivals(rng: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    """Cumulative exponential waits truncated at ``horizon``."""
    if rate <= 0:
        return np.empty(0)
    expected = rate * horizon
    chunk = int(expected + 6.0 * np.sqrt(expected) + 16)
    times = np.cumsum(rng.exponential(1.0 / rate, size=chunk))
    while times[-1] <= horizon:
        more = times[-1] + np.cumsum(rng.exponential(1.0 / rate, size=chunk))
        times = np.concatenate([times, more])
    return times[times <= horizon]


def simulate_hpp(rate: float, horizon: float, seed=0) -> np.ndarray:
    if rate < 0 or horizon <= 0:
        raise ValueError("need rate >= 0 and horizon > 0")
    return _hpp_arrivals(make_rng(seed), rate, horizon)


def simulate_nhpp(model: IntensityModel, seed=0) -> np.ndarray:
    """Thinning: candidates at the majorant rate, kept with prob lam(t)/majorant."""
    if not model.is_feasible():
        raise ValueError("fraud intensity is infeasible on its horizon")
    rng = make_rng(seed)
    bound = model.majorant()
    candidates = _hpp_arrivals(rng, bound, model.horizon)
    if candidates.size == 0:
        return candidates
    u = rng.uniform(size=candidates.size)
    return candidates[u * bound < model.evaluate(candidates)]


@dataclass(frozen=True)
class SimSpec:
    n_clients: int
    genuine_rate: float
    fraud_model: IntensityModel
    horizon_days: float
    seed: int = 0
    prefix: str = "C"
    labeling: str = "merge"

    def __post_init__(self) -> None:
        if self.labeling not in LABELINGS:
            raise ValueError(f"labeling must be one of {LABELINGS}")
        if self.n_clients < 0:
            raise ValueError("n_clients must be >= 0")
        if not self.genuine_rate > 0 or not self.horizon_days > 0:
            raise ValueError("genuine_rate and horizon_days must be positive")
        if not self.fraud_model.is_feasible():
            raise ValueError("fraud_model is infeasible")

    def to_dict(self) -> dict:
        return {
            "n_clients": self.n_clients,
            "genuine_rate": self.genuine_rate,
            "fraud_model": {
                "family": self.fraud_model.family.value,
                "params": list(self.fraud_model.params),
                "horizon": self.fraud_model.horizon,
            },
            "horizon_days": self.horizon_days,
            "seed": self.seed,
            "prefix": self.prefix,
            "labeling": self.labeling,
            "rng": RNG_NAME,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimSpec":
        fm = data["fraud_model"]
        return cls(
            data["n_clients"], data["genuine_rate"],
            IntensityModel(Family.parse(fm["family"]), fm["params"], fm["horizon"]),
            data["horizon_days"], data["seed"], data.get("prefix", "C"), data.get("labeling", "merge"),
        )

    def expected_fraud_proportion(self) -> float:
        """Expected frauds over expected transactions (merge labelling)."""
        frauds = self.fraud_model.compensator(min(self.horizon_days, self.fraud_model.horizon))
        return frauds / (frauds + self.genuine_rate * self.horizon_days + 1.0)


def simulate_client(spec: SimSpec, index: int) -> EventTimeline:
    rng = make_rng(spec.seed, index)
    genuine = _hpp_arrivals(rng, spec.genuine_rate, spec.horizon_days)
    fraud_model = spec.fraud_model
    if fraud_model.horizon != spec.horizon_days:
        fraud_model = IntensityModel(fraud_model.family, fraud_model.params, spec.horizon_days)
    frauds = simulate_nhpp(fraud_model, rng)
    client_id = f"{spec.prefix}{index:05d}"
    if spec.labeling == "attach":
        times = np.concatenate([[0.0], genuine])
        seen = np.searchsorted(frauds, times, side="right")
        labels = np.diff(seen, prepend=0) > 0
        labels[0] = False
        return EventTimeline.from_events(client_id, times, labels.astype(np.int8))
    times = np.concatenate([[0.0], genuine, frauds])
    labels = np.concatenate([np.zeros(1 + genuine.size, dtype=np.int8), np.ones(frauds.size, dtype=np.int8)])
    order = np.argsort(times, kind="mergesort")
    return EventTimeline.from_events(client_id, times[order], labels[order])


def simulate_dataset(spec: SimSpec) -> list[EventTimeline]:
    return [simulate_client(spec, i) for i in range(spec.n_clients)]


def write_dataset(timelines: list[EventTimeline], specs: list[SimSpec], out_dir: str | Path, name: str = "dataset") -> tuple[Path, Path]:
    """Write ``<name>.csv`` plus a ``<name>.manifest.json`` with ground truth."""
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{name}.csv"
    manifest_path = out_dir / f"{name}.manifest.json"
    write_csv(timelines, csv_path)
    manifest = {
        "rng": RNG_NAME,
        "time_unit": "days",
        "specs": [s.to_dict() for s in specs],
        "n_clients": len(timelines),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return csv_path, manifest_path


# Target fraud proportion per imbalance bucket.
GROUP_TARGETS = {"G1": 0.005, "G2": 0.03, "G3": 0.075, "G4": 0.15}


def group_specs(
    clients_per_group: int,
    seed: int,
    *,
    frauds_per_client: float = 12.0,
    horizon_days: float = 365.0,
    fraud_family: Family | str = Family.CONSTANT,
    labeling: str = "attach",
) -> list[SimSpec]:
    """One SimSpec per imbalance bucket.

    The genuine rate gives each client about ``frauds_per_client / p``
    transactions for target proportion ``p``, so low-fraud clients have
    longer histories. The fraud level is set so a transaction is fraudulent
    with probability ``p``. Non-constant families rise from half to 1.5x that
    level across the horizon.
    """
    family = Family.parse(fraud_family)
    specs = []
    for k, (group, p) in enumerate(GROUP_TARGETS.items()):
        rate = frauds_per_client / p / horizon_days
        if labeling == "attach":
            level = -rate * np.log1p(-p)
        else:
            level = p / (1.0 - p) * rate
        if family is Family.CONSTANT:
            params: tuple[float, ...] = (level,)
        elif family is Family.LINEAR:
            params = (0.5 * level, level / horizon_days)
        else:
            params = (0.5 * level, 0.0, 1.5 * level / horizon_days**2)
        model = IntensityModel(family, params, horizon_days)
        specs.append(SimSpec(clients_per_group, rate, model, horizon_days, seed + 1000 * k, f"{group}-", labeling))
    return specs
