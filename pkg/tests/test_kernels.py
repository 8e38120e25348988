"""The compiled kernels and the pure-Python twin must agree."""

import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from poissonfraud import _backend, _pykernels

compiled = pytest.importorskip("poissonfraud._kernels")


def _problem(seed, k):
    rng = np.random.default_rng(seed)
    T = rng.uniform(1, 10)
    tau = np.sort(rng.uniform(0, T, k))
    return np.ascontiguousarray(tau / T), k / T, T


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_objective_agrees(dim):
    s, scale, T = _problem(dim, 12)
    rng = np.random.default_rng(dim)
    for _ in range(50):
        u = list(rng.uniform(-2, 3, dim))
        a = compiled.penalized_nll(u, s, scale, T, 1e6)
        b = _pykernels.penalized_nll(u, s, scale, T, 1e6)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_nelder_mead_agrees(dim):
    s, scale, T = _problem(10 + dim, 7)
    x0 = [1.0, 0.5, 0.2][:dim]
    step = [0.25] * dim
    xc, fc, ic, cc = compiled.nelder_mead(x0, step, s, scale, T, 1e6, 1e-8, 5000)
    xp, fp, ip, cp = _pykernels.nelder_mead(x0, step, s, scale, T, 1e6, 1e-8, 5000)
    assert cc and cp
    assert fc == pytest.approx(fp, abs=1e-9)
    np.testing.assert_allclose(xc, xp, atol=1e-6)


def test_nelder_mead_respects_maxiter():
    s, scale, T = _problem(0, 5)
    x, f, it, conv = compiled.nelder_mead([3.0, 3.0], [0.25, 0.25], s, scale, T, 1e6, 1e-30, 7)
    assert it == 7 and not conv


def test_backend_prefers_compiled():
    assert _backend.BACKEND == "cython"


def test_forced_fallback_gives_same_fit():
    code = (
        "import poissonfraud.estimation as e, json;"
        "f = e.maximize_log_likelihood('linear', [0.4, 1.3, 2.2, 2.9], 3.0);"
        "print(json.dumps([e.BACKEND, f.model.params, f.log_likelihood]))"
    )
    env = dict(os.environ, POISSONFRAUD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    import json
    backend, params, ll = json.loads(out.stdout)
    assert backend == "python"
    from poissonfraud.estimation import maximize_log_likelihood
    fit = maximize_log_likelihood("linear", [0.4, 1.3, 2.2, 2.9], 3.0)
    np.testing.assert_allclose(params, fit.model.params, atol=1e-6)
    assert ll == pytest.approx(fit.log_likelihood, abs=1e-9)
