"""Polynomial intensity families, their compensators and feasibility constraints."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

FEASIBILITY_TOL = 1e-10


class Family(str, enum.Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    QUADRATIC = "quadratic"

    @property
    def n_params(self) -> int:
        return {"constant": 1, "linear": 2, "quadratic": 3}[self.value]

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        return cls(value.strip().lower())


def constraint_values(family: Family | str, params: Sequence[float], T: float) -> list[float]:
    """Left-hand sides of the nonnegativity constraints; feasible iff all >= 0.

    Constant: [lam]. Linear: [a, b + a/T]. Quadratic: [a, c, b + a/T].
    """
    family = Family.parse(family)
    p = [float(x) for x in params]
    if len(p) != family.n_params:
        raise ValueError(f"{family.value} takes {family.n_params} parameter(s), got {len(p)}")
    if family is Family.CONSTANT:
        return [p[0]]
    if family is Family.LINEAR:
        return [p[0], p[1] + p[0] / T]
    return [p[0], p[2], p[1] + p[0] / T]


def feasible(family: Family | str, params: Sequence[float], T: float, tol: float = FEASIBILITY_TOL) -> bool:
    if T <= 0:
        raise ValueError("T must be positive")
    return all(v >= -tol for v in constraint_values(family, params, T))


@dataclass(frozen=True)
class IntensityModel:
    """A deterministic intensity ``lam(t)`` with the horizon it was validated on."""

    family: Family
    params: tuple[float, ...]
    horizon: float

    def __post_init__(self) -> None:
        family = Family.parse(self.family)
        params = tuple(float(x) for x in self.params)
        if len(params) != family.n_params:
            raise ValueError(f"{family.value} takes {family.n_params} parameter(s)")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "horizon", float(self.horizon))

    @classmethod
    def zero(cls, family: Family | str, horizon: float = 1.0) -> "IntensityModel":
        family = Family.parse(family)
        return cls(family, (0.0,) * family.n_params, horizon)

    @property
    def coefficients(self) -> tuple[float, float, float]:
        """(a, b, c) of a + b t + c t^2, padding missing terms with 0."""
        return tuple(self.params) + (0.0,) * (3 - len(self.params))  # type: ignore[return-value]

    @property
    def is_zero(self) -> bool:
        return all(p == 0.0 for p in self.params)

    def is_feasible(self, tol: float = FEASIBILITY_TOL) -> bool:
        return feasible(self.family, self.params, self.horizon, tol)

    def _check(self, t, extrapolate: bool) -> np.ndarray:
        arr = np.asarray(t, dtype=np.float64)
        if np.any(arr < 0):
            raise ValueError("t must be nonnegative")
        if not extrapolate and np.any(arr > self.horizon):
            raise ValueError(f"t beyond horizon {self.horizon}; pass extrapolate=True")
        return arr

    def evaluate(self, t, extrapolate: bool = False):
        a, b, c = self.coefficients
        s = self._check(t, extrapolate)
        out = a + s * (b + c * s)
        return float(out) if out.ndim == 0 else out

    def compensator(self, t, extrapolate: bool = False):
        """Closed-form integral of the intensity over [0, t]."""
        a, b, c = self.coefficients
        s = self._check(t, extrapolate)
        out = s * (a + s * (b / 2.0 + s * c / 3.0))
        return float(out) if out.ndim == 0 else out

    def majorant(self, T: float | None = None) -> float:
        """Maximum of the intensity on [0, T] (endpoints and interior vertex)."""
        a, b, c = self.coefficients
        T = self.horizon if T is None else T
        candidates = [a, a + b * T + c * T * T]
        if c != 0.0:
            vertex = -b / (2.0 * c)
            if 0.0 < vertex < T:
                candidates.append(a + b * vertex + c * vertex * vertex)
        return max(max(candidates), 0.0)


def evaluate(model: IntensityModel, t, extrapolate: bool = False):
    return model.evaluate(t, extrapolate)


def compensator(model: IntensityModel, t, extrapolate: bool = False):
    return model.compensator(t, extrapolate)


@dataclass(frozen=True)
class RegionGrid:
    """Feasibility over a parameter lattice. ``feasible`` is indexed [i_a, i_b(, i_c)]."""

    family: Family
    T: float
    axes: tuple[np.ndarray, ...]
    feasible: np.ndarray

    def rows(self):
        names = ("a", "b", "c")[: len(self.axes)] if self.family is not Family.CONSTANT else ("lambda",)
        mesh = np.meshgrid(*self.axes, indexing="ij")
        for idx in np.ndindex(self.feasible.shape):
            yield dict(zip(names, (float(m[idx]) for m in mesh)), feasible=int(self.feasible[idx]))

    def to_csv(self, path: str | Path) -> None:
        rows = list(self.rows())
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)


def feasible_region_grid(
    family: Family | str,
    a_max: float,
    b_max: float,
    T: float,
    resolution: int,
    c_values: Sequence[float] | None = None,
) -> RegionGrid:
    """Evaluate feasibility on [0, a_max] x [-b_max, b_max] (x c slices).

    For the constant family the grid is the single axis lambda in
    [-a_max, a_max].
    """
    family = Family.parse(family)
    if a_max <= 0 or b_max <= 0:
        raise ValueError("a_max and b_max must be positive")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if T <= 0:
        raise ValueError("T must be positive")
    if family is Family.CONSTANT:
        lam = np.linspace(-a_max, a_max, resolution)
        return RegionGrid(family, T, (lam,), lam >= -FEASIBILITY_TOL)

    a = np.linspace(0.0, a_max, resolution)
    b = np.linspace(-b_max, b_max, resolution)
    A, B = np.meshgrid(a, b, indexing="ij")
    linear_ok = (A >= -FEASIBILITY_TOL) & (B + A / T >= -FEASIBILITY_TOL)
    if family is Family.LINEAR:
        return RegionGrid(family, T, (a, b), linear_ok)

    c = np.asarray(c_values if c_values is not None else [0.0], dtype=np.float64)
    mask = linear_ok[:, :, None] & (c[None, None, :] >= -FEASIBILITY_TOL)
    return RegionGrid(family, T, (a, b, c), mask)
