"""Compare the compiled Nelder-Mead kernel with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--fits 200] [--events 20]

Each fit is one multi-start linear MLE as run by the estimator (16 starts
plus a polish run). Both backends see the same problems.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from poissonfraud import _pykernels
from poissonfraud.estimation import MAX_ITER, N_STARTS, PENALTY, XTOL, _starts
from poissonfraud.intensity import Family

try:
    from poissonfraud import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def problems(n_fits: int, n_events: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    for _ in range(n_fits):
        T = rng.uniform(5, 100)
        tau = np.sort(rng.uniform(0, T, n_events))
        yield np.ascontiguousarray(tau / T), n_events / T, T, T / tau[-1]


def run(backend, cases, family: Family) -> tuple[float, list[float]]:
    best = []
    start = time.perf_counter()
    for s, scale, T, level in cases:
        values = []
        for x0 in _starts(family, level)[:N_STARTS]:
            _, f, _, _ = backend.nelder_mead(x0, [0.25] * family.n_params, s, scale, T, PENALTY, XTOL, MAX_ITER)
            values.append(f)
        best.append(min(values))
    return time.perf_counter() - start, best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fits", type=int, default=200)
    parser.add_argument("--events", type=int, default=20)
    parser.add_argument("--family", choices=("linear", "quadratic"), default="linear")
    args = parser.parse_args()
    family = Family.parse(args.family)
    cases = list(problems(args.fits, args.events))

    t_py, f_py = run(_pykernels, cases, family)
    print(f"python : {t_py:8.3f} s  ({1e3 * t_py / len(cases):7.3f} ms/fit)")
    if compiled is None:
        print("cython : extension not built")
        return
    t_c, f_c = run(compiled, cases, family)
    print(f"cython : {t_c:8.3f} s  ({1e3 * t_c / len(cases):7.3f} ms/fit)")
    print(f"speedup: {t_py / t_c:8.1f}x")
    print(f"max |objective difference|: {np.max(np.abs(np.subtract(f_py, f_c))):.2e}")


if __name__ == "__main__":
    main()
