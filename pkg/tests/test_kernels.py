import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from missml import _kernels
from missml._kernels import _fallback
from missml.critical_system import build
from missml.homotopy import SolverOptions, _poly_arrays, _total_degree_homotopy
from missml.scenarios import random_stats

try:
    from missml._kernels import _core
except ImportError:  # extension not built
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


@pytest.fixture
def homotopy(generic_stats):
    return _total_degree_homotopy(build(generic_stats), np.random.default_rng(3))


def test_backend_selected_at_import():
    assert _kernels.BACKEND in ("cython", "python")
    if _core is not None:
        assert _kernels.BACKEND == "cython"


def test_env_var_forces_fallback():
    code = "import missml._kernels as k; print(k.BACKEND, k.track_paths.__module__)"
    env = dict(os.environ, MISSML_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "missml._kernels._fallback"]


@needs_core
def test_track_paths_backends_agree(homotopy):
    exps, ptr, c0, c1, starts = homotopy
    starts = np.ascontiguousarray(starts[:12])
    opts = SolverOptions().tracker()
    e_py, t_py, s_py, n_py = _fallback.track_paths(exps, ptr, c0, c1, starts, opts)
    e_cy, t_cy, s_cy, n_cy = _core.track_paths(exps, ptr, c0, c1, starts, opts)
    np.testing.assert_array_equal(s_py, s_cy)
    finite = (s_cy == _kernels.OK) & (np.abs(e_cy[:, 0]) > 1e-6 * np.linalg.norm(e_cy, axis=1))
    assert finite.any()
    np.testing.assert_allclose(e_py[finite], e_cy[finite], rtol=1e-9, atol=1e-9)


@needs_core
@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_evaluate_backends_agree(seed, t):
    rng = np.random.default_rng(seed)
    exps, ptr, c0, c1, _ = _total_degree_homotopy(build(random_stats(rng)), rng)
    x = rng.normal(size=exps.shape[1]) + 1j * rng.normal(size=exps.shape[1])
    for a, b in zip(_fallback.evaluate(exps, ptr, c0, c1, x, t), _core.evaluate(exps, ptr, c0, c1, x, t)):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(a)))


def test_evaluate_matches_polynomials(generic_stats, rng):
    system = build(generic_stats)
    exps, ptr, coeffs = _poly_arrays(system.polys)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    H, J, _ = _kernels.evaluate(exps, ptr, coeffs, coeffs, x, 1.0)
    np.testing.assert_allclose(H, system.evaluate(x), rtol=1e-12)
    h = 1e-7
    for v in range(5):
        e = np.zeros(5)
        e[v] = h
        fd = (system.evaluate(x + e) - system.evaluate(x - e)) / (2 * h)
        np.testing.assert_allclose(J[:, v], fd, rtol=1e-6, atol=1e-6 * np.max(np.abs(J)))


def test_newton_refine_converges_on_univariate():
    exps = np.array([[3], [0]], dtype=np.int32)
    ptr = np.array([0, 2], dtype=np.int32)
    coeffs = np.array([1.0, -8.0], dtype=complex)
    for mod in [_fallback] + ([_core] if _core is not None else []):
        x, step, it = mod.newton_refine(exps, ptr, coeffs, np.array([2.1 + 0.05j]))
        assert abs(x[0] - 2.0) < 1e-14 and it < 20


def test_track_univariate_roots_of_unity():
    # (1-t) * (x^3 - 1) + t * (x^3 - 8): roots scale from cube roots of 1 to those of 8
    exps = np.array([[3], [0]], dtype=np.int32)
    ptr = np.array([0, 2], dtype=np.int32)
    c0 = np.array([1.0, -1.0], dtype=complex)
    c1 = np.array([1.0, -8.0], dtype=complex)
    starts = np.exp(2j * np.pi * np.arange(3) / 3)[:, None]
    ends, t, status, _ = _kernels.track_paths(exps, ptr, c0, c1, np.ascontiguousarray(starts), {})
    assert np.all(status == _kernels.OK) and np.all(t == 1.0)
    np.testing.assert_allclose(ends[:, 0], 2 * starts[:, 0], atol=1e-8)


@pytest.mark.parametrize("m,n,flag", [(2, 2, False), (2, 3, True), (3, 3, False), (3, 3, True)])
def test_lonesum_backends_agree(m, n, flag):
    ref = _fallback.count_lonesum_range(m, n, 0, 1 << (m * n), flag)
    assert _kernels.count_lonesum_range(m, n, 0, 1 << (m * n), flag) == ref
