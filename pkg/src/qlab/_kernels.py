"""Hot numeric kernels: divergence-form stencil application.

The eigensolver spends nearly all of its time applying the 9-point
divergence-form operator, so that kernel is compiled with numba when
available.  Set QLAB_NUMBA=0 to force the pure-numpy fallback (the two
paths agree to rounding; benchmarks/kernel_bench.py compares them).
"""

from __future__ import annotations

import os

import numpy as np


def _numba_enabled() -> bool:
    flag = os.environ.get("QLAB_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


def _apply_numpy(u, a11f, a22f, a12c, inv_sqrtg, v, c_flux, c_cross, out):
    up = np.roll(u, -1, 0)
    um = np.roll(u, 1, 0)
    vp = np.roll(u, -1, 1)
    vm = np.roll(u, 1, 1)
    flux = (a11f * (up - u) - np.roll(a11f, 1, 0) * (u - um)
            + a22f * (vp - u) - np.roll(a22f, 1, 1) * (u - vm))
    d2 = vp - vm
    d1 = up - um
    cross = (np.roll(a12c * d2, -1, 0) - np.roll(a12c * d2, 1, 0)
             + np.roll(a12c * d1, -1, 1) - np.roll(a12c * d1, 1, 1))
    out[...] = v * u - inv_sqrtg * (c_flux * flux + c_cross * cross)
    return out


USING_NUMBA = False

if _numba_enabled():
    try:
        import numba

        @numba.njit(cache=True)
        def _apply_njit(u, a11f, a22f, a12c, inv_sqrtg, v, c_flux, c_cross, out):
            n1, n2 = u.shape
            for i in range(n1):
                ip = i + 1 if i + 1 < n1 else 0
                im = i - 1 if i - 1 >= 0 else n1 - 1
                for j in range(n2):
                    jp = j + 1 if j + 1 < n2 else 0
                    jm = j - 1 if j - 1 >= 0 else n2 - 1
                    flux = (a11f[i, j] * (u[ip, j] - u[i, j])
                            - a11f[im, j] * (u[i, j] - u[im, j])
                            + a22f[i, j] * (u[i, jp] - u[i, j])
                            - a22f[i, jm] * (u[i, j] - u[i, jm]))
                    cross = (a12c[ip, j] * (u[ip, jp] - u[ip, jm])
                             - a12c[im, j] * (u[im, jp] - u[im, jm])
                             + a12c[i, jp] * (u[ip, jp] - u[im, jp])
                             - a12c[i, jm] * (u[ip, jm] - u[im, jm]))
                    out[i, j] = v[i, j] * u[i, j] - inv_sqrtg[i, j] * (
                        c_flux * flux + c_cross * cross)
            return out

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _apply_njit = None
else:
    _apply_njit = None


def apply_divergence_form(u, a11f, a22f, a12c, inv_sqrtg, v, c_flux, c_cross, out=None):
    """Apply V*u - inv_sqrtg * div(A grad u) on a periodic grid.

    a11f/a22f hold the flux coefficients at the (i+1/2, j) and (i, j+1/2)
    faces, a12c the cross coefficient at cell centers.  c_flux multiplies
    the straight second differences (h^2/dx^2), c_cross the centered
    cross form (h^2/(4 dx^2)).
    """
    if out is None:
        out = np.empty_like(u)
    if USING_NUMBA:
        return _apply_njit(u, a11f, a22f, a12c, inv_sqrtg, v,
                           float(c_flux), float(c_cross), out)
    return _apply_numpy(u, a11f, a22f, a12c, inv_sqrtg, v,
                        float(c_flux), float(c_cross), out)


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
