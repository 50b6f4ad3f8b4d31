"""Band-limited evaluation at off-grid points via the chirp-z transform.

Periodic grid functions are trigonometric polynomials, so evaluating
them on any uniform point progression is exact (to rounding).  Used for
axis profiles of the frequency-box synthesis and for the rescaling maps'
resampling path.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import czt

from .field import GridFunction, Grid2D


def eval_spectrum_1d(samples, dxi, m_lo, x_start, x_step, count):
    """Evaluate f(x) = dxi * sum_m samples[m] e^{i x xi_m} on a uniform
    progression x_p = x_start + p * x_step.

    samples[q] holds the coefficient at xi = (m_lo + q) * dxi.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    q = np.arange(len(samples))
    b = samples * np.exp(1j * x_start * q * dxi)
    w = np.exp(1j * x_step * dxi)
    x = czt(b, m=count, w=w, a=1.0 + 0.0j)
    p = np.arange(count)
    phase = np.exp(1j * (x_start + p * x_step) * m_lo * dxi)
    return dxi * phase * x


def _axis_eval_matrixless(values, half_width, points_out_start, step, count, axis):
    """Evaluate the trig interpolant of periodic samples along one axis."""
    n = values.shape[axis]
    spec = np.fft.fft(values, axis=axis)
    spec = np.fft.fftshift(spec, axes=axis)
    m_lo = -(n // 2)
    dxi = np.pi / half_width
    # u(x) = (1/n) sum_m S_m e^{i xi_m (x + L)}
    mov = np.moveaxis(spec, axis, -1)
    q = np.arange(n)
    b = mov * np.exp(1j * (points_out_start + half_width) * q * dxi)
    w = np.exp(1j * step * dxi)
    x = czt(b, m=count, w=w, a=1.0 + 0.0j, axis=-1)
    p = np.arange(count)
    phase = np.exp(1j * (points_out_start + p * step + half_width) * m_lo * dxi)
    out = (x * phase) / n
    return np.moveaxis(out, -1, axis)


def evaluate_scaled(u: GridFunction, scale: float, target: Grid2D):
    """Samples of x -> u(scale * x) on the target grid, by exact
    trigonometric interpolation of the periodic source."""
    src_l = u.grid.half_width
    tx0 = -target.half_width * scale
    tstep = target.spacing * scale
    n_out = target.points_per_dim
    if abs(tx0) > src_l + 1e-12:
        raise ValueError("scaled target grid extends beyond the source box")
    vals = _axis_eval_matrixless(np.asarray(u.values), src_l, tx0, tstep, n_out, axis=0)
    vals = _axis_eval_matrixless(vals, src_l, tx0, tstep, n_out, axis=1)
    return vals
