"""Maximum-likelihood estimation of fraud intensities.

Constant intensity uses the mean-waiting-time estimator. Linear and quadratic
intensities maximize the Poisson log-likelihood

    l = -A(T) + sum_i log lam(tau_i)

over the nonnegativity constraints with a multi-start, penalized
Nelder-Mead search run in scaled coordinates (see ``_kernels.pyx``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Sequence

import numpy as np
from scipy.stats import qmc

from ._backend import BACKEND, kernels
from .intensity import FEASIBILITY_TOL, Family, IntensityModel, feasible
from .timeline import EventTimeline, fraud_times as _fraud_times

LOG_FLOOR = 1e-12
PENALTY = 1e6
N_STARTS = 16
XTOL = 1e-8
MAX_ITER = 5000
LHS_SEED = 20200101
START_BOX = 4.0  # LHS box half-width in scaled units


@dataclass(frozen=True)
class FitResult:
    model: IntensityModel
    log_likelihood: float | None
    converged: bool
    iterations: int
    zero_convention: bool
    client_id: str = ""
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "client_id": self.client_id,
            "family": self.model.family.value,
            "params": list(self.model.params),
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
            "zero_convention": self.zero_convention,
            "horizon": self.model.horizon,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FitResult":
        model = IntensityModel(Family.parse(data["family"]), data["params"], data.get("horizon", 1.0))
        return cls(
            model=model,
            log_likelihood=data["log_likelihood"],
            converged=data["converged"],
            iterations=data["iterations"],
            zero_convention=data["zero_convention"],
            client_id=data.get("client_id", ""),
            diagnostics=data.get("diagnostics", {}),
        )


def _zero_result(family: Family, horizon: float, client_id: str, **diagnostics) -> FitResult:
    return FitResult(
        model=IntensityModel.zero(family, horizon if horizon > 0 else 1.0),
        log_likelihood=None,
        converged=True,
        iterations=0,
        zero_convention=True,
        client_id=client_id,
        diagnostics=diagnostics,
    )


def log_likelihood(family: Family | str, params: Sequence[float], fraud_times: Sequence[float], T: float) -> float:
    """Poisson log-likelihood of ``fraud_times`` on [0, T] with log floor 1e-12."""
    family = Family.parse(family)
    if not feasible(family, params, T):
        raise ValueError(f"infeasible {family.value} parameters {tuple(params)} for T={T}")
    tau = np.asarray(fraud_times, dtype=np.float64)
    if tau.size and (tau.min() < 0 or tau.max() > T):
        raise ValueError("fraud times must lie in [0, T]")
    model = IntensityModel(family, params, T)
    lam = np.maximum(model.evaluate(tau), LOG_FLOOR)
    return float(-model.compensator(T) + np.sum(np.log(lam)))


def estimate_hpp(train: EventTimeline) -> FitResult:
    """Constant intensity as the reciprocal mean waiting time, k / tau_k.

    The censored-interval MLE k / T is recorded under
    ``diagnostics["censored_mle"]``.
    """
    tau = _fraud_times(train)
    k = int(tau.size)
    T = train.horizon
    if k == 0:
        return _zero_result(Family.CONSTANT, T, train.client_id)
    diagnostics: dict[str, Any] = {"censored_mle": k / T if T > 0 else None, "degenerate": False}
    last = float(tau[-1])
    if last > 0:
        lam = k / last  # 1 / mean(S), S_1 = tau_1, S_i = tau_i - tau_{i-1}
    elif T > 0:
        lam = k / T
        diagnostics["degenerate"] = True
    else:
        return FitResult(
            IntensityModel.zero(Family.CONSTANT),
            None,
            converged=False,
            iterations=0,
            zero_convention=False,
            client_id=train.client_id,
            diagnostics={"degenerate": True, "reason": "zero-length horizon"},
        )
    model = IntensityModel(Family.CONSTANT, (lam,), T)
    return FitResult(
        model,
        log_likelihood(Family.CONSTANT, (lam,), tau, T),
        converged=True,
        iterations=0,
        zero_convention=False,
        client_id=train.client_id,
        diagnostics=diagnostics,
    )


@lru_cache(maxsize=None)
def _lhs_points(dim: int, count: int) -> np.ndarray:
    unit = qmc.LatinHypercube(d=dim, seed=LHS_SEED).random(count)
    lower = np.array([0.0, -START_BOX, 0.0][:dim])
    upper = np.array([START_BOX, START_BOX, START_BOX][:dim])
    return qmc.scale(unit, lower, upper)


def _starts(family: Family, hpp_level: float) -> list[list[float]]:
    """Deterministic start points in scaled units (1.0 = k/T)."""
    dim = family.n_params
    fixed: list[list[float]] = [[hpp_level], [1.0]]
    if dim >= 2:
        fixed += [[0.0, 2.0], [2.0, -2.0]]
    if dim == 3:
        fixed += [[0.0, 0.0, 3.0], [1.0, -1.0, 1.0]]
    fixed = [(p + [0.0] * dim)[:dim] for p in fixed]
    lhs = _lhs_points(dim, N_STARTS - len(fixed))
    return fixed + [list(row) for row in lhs]


def _project(u: Sequence[float]) -> list[float]:
    """Euclidean projection onto {u0 >= 0, u0 + u1 >= 0, u2 >= 0}."""
    u = list(u)
    if len(u) == 1:
        return [max(u[0], 0.0)]
    u0, u1 = u[0], u[1]
    if not (u0 >= 0.0 and u0 + u1 >= 0.0):
        candidates = [(0.0, 0.0)]
        if u1 >= 0.0:
            candidates.append((0.0, u1))
        shift = (u0 + u1) / 2.0
        if u0 - shift >= 0.0:
            candidates.append((u0 - shift, u1 - shift))
        u0, u1 = min(candidates, key=lambda p: (p[0] - u[0]) ** 2 + (p[1] - u[1]) ** 2)
        u1 = max(u1, -u0)
    out = [u0, u1]
    if len(u) == 3:
        out.append(max(u[2], 0.0))
    return out


def maximize_log_likelihood(
    family: Family | str,
    fraud_times: Sequence[float],
    T: float,
    *,
    n_starts: int = N_STARTS,
    client_id: str = "",
) -> FitResult:
    """Constrained MLE for any polynomial family, assuming at least one fraud."""
    family = Family.parse(family)
    tau = np.ascontiguousarray(fraud_times, dtype=np.float64)
    k = int(tau.size)
    if k == 0:
        return _zero_result(family, T, client_id)
    if not T > 0:
        return FitResult(
            IntensityModel.zero(family),
            None,
            converged=False,
            iterations=0,
            zero_convention=False,
            client_id=client_id,
            diagnostics={"degenerate": True, "reason": "zero-length horizon"},
        )
    scale = k / T
    s = tau / T
    hpp_level = T / tau[-1] if tau[-1] > 0 else 1.0
    step = [0.25] * family.n_params

    best = None
    total_iter = 0
    any_converged = False
    for index, x0 in enumerate(_starts(family, hpp_level)[:n_starts]):
        x, fval, iters, conv = kernels.nelder_mead(x0, step, s, scale, T, PENALTY, XTOL, MAX_ITER)
        total_iter += iters
        any_converged |= conv
        if best is None or fval < best[1]:
            best = (x, fval, index)
    # polish from the best vertex with a fresh simplex
    x, fval, iters, conv = kernels.nelder_mead(best[0], [0.05] * family.n_params, s, scale, T, PENALTY, XTOL, MAX_ITER)
    total_iter += iters
    if fval < best[1]:
        best = (x, fval, best[2])
    any_converged |= conv

    u = _project(best[0])
    params = [scale * u[0]]
    if family.n_params >= 2:
        params.append(scale * u[1] / T)
    if family.n_params == 3:
        params.append(scale * u[2] / (T * T))
    if family.n_params >= 2 and params[1] + params[0] / T < 0:
        params[1] = -params[0] / T
    model = IntensityModel(family, params, T)
    ok = model.is_feasible(FEASIBILITY_TOL)
    return FitResult(
        model,
        log_likelihood(family, params, tau, T) if ok else None,
        converged=bool(any_converged and ok),
        iterations=total_iter,
        zero_convention=False,
        client_id=client_id,
        diagnostics={"best_start": best[2], "backend": BACKEND, "censored_mle": scale},
    )


def estimate_nhpp(family: Family | str, train: EventTimeline, *, n_starts: int = N_STARTS) -> FitResult:
    """Fit a linear or quadratic intensity on the training segment.

    A fraud-free segment yields the all-zero model with ``zero_convention``.
    """
    family = Family.parse(family)
    if family is Family.CONSTANT:
        raise ValueError("use estimate_hpp for the constant family")
    return maximize_log_likelihood(
        family, _fraud_times(train), train.horizon, n_starts=n_starts, client_id=train.client_id
    )


def estimate(family: Family | str, train: EventTimeline) -> FitResult:
    family = Family.parse(family)
    if family is Family.CONSTANT:
        return estimate_hpp(train)
    return estimate_nhpp(family, train)

