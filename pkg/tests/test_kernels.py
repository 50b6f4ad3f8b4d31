"""Numba stencil kernel against the pure-numpy fallback."""

import numpy as np
import pytest

from qlab._kernels import _apply_numpy, apply_divergence_form, backend_name


def _random_coeffs(n, seed):
    rng = np.random.default_rng(seed)
    a11 = 1.0 + 0.05 * rng.standard_normal((n, n))
    a22 = 1.0 + 0.05 * rng.standard_normal((n, n))
    a12 = 0.05 * rng.standard_normal((n, n))
    isg = 1.0 + 0.05 * rng.standard_normal((n, n))
    v = rng.standard_normal((n, n))
    return a11, a22, a12, isg, v


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("dtype", [np.float64, np.complex128])
def test_backends_agree(seed, dtype):
    n = 64
    rng = np.random.default_rng(100 + seed)
    u = rng.standard_normal((n, n)).astype(dtype)
    if dtype == np.complex128:
        u = u + 1j * rng.standard_normal((n, n))
    a11, a22, a12, isg, v = _random_coeffs(n, seed)
    out_main = apply_divergence_form(u, a11, a22, a12, isg, v, 1.3, 0.35)
    out_np = _apply_numpy(u, a11, a22, a12, isg, v, 1.3, 0.35, np.empty_like(u))
    assert np.max(np.abs(out_main - out_np)) < 1e-12 * max(1.0, np.max(np.abs(out_main)))


def test_periodic_wraparound():
    # a delta at the corner must reach its periodic neighbors
    n = 8
    u = np.zeros((n, n))
    u[0, 0] = 1.0
    ones = np.ones((n, n))
    out = apply_divergence_form(u, ones, ones, np.zeros((n, n)), ones,
                                np.zeros((n, n)), 1.0, 0.0)
    assert out[n - 1, 0] == -1.0 and out[0, n - 1] == -1.0
    assert out[0, 0] == 4.0


def test_reports_backend():
    assert backend_name() in ("numba", "numpy")
