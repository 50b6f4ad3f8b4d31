"""Grids, sampled functions, bump profiles, and norm computations.

Everything here lives on uniform periodic boxes.  Quadrature is the
midpoint rule, which on a periodic box is exact for band-limited
functions and matches the FFT conventions used by the operator and
synthesis modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import GridMismatchError

Array = np.ndarray

_SQRT2 = math.sqrt(2.0)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-half_width, half_width).

    points must be a power of two so that FFT frequency supports are
    exact dyadic rectangles.
    """

    half_width: float
    points: int

    def __post_init__(self):
        if not _is_power_of_two(self.points):
            raise ValueError(f"points must be a power of two, got {self.points}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    def coords(self) -> Array:
        return -self.half_width + self.spacing * np.arange(self.points)

    def frequencies(self) -> Array:
        """Angular frequencies in FFT order (spacing pi / half_width)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    @property
    def frequency_spacing(self) -> float:
        return np.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on the square [-half_width, half_width)^2."""

    half_width: float
    points_per_dim: int

    def __post_init__(self):
        if not _is_power_of_two(self.points_per_dim):
            raise ValueError(
                f"points_per_dim must be a power of two, got {self.points_per_dim}"
            )
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_dim

    def axis(self) -> Grid1D:
        return Grid1D(self.half_width, self.points_per_dim)

    def coords(self):
        x = -self.half_width + self.spacing * np.arange(self.points_per_dim)
        return np.meshgrid(x, x, indexing="ij")

    def frequencies(self):
        k = 2.0 * np.pi * np.fft.fftfreq(self.points_per_dim, d=self.spacing)
        return np.meshgrid(k, k, indexing="ij")

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing

    @property
    def cell_area(self) -> float:
        return self.spacing ** 2


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a Grid2D, indexed (i1, i2)."""

    grid: Grid2D
    values: Array

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        n = self.grid.points_per_dim
        if vals.shape != (n, n):
            raise ValueError(f"values shape {vals.shape} does not match grid {n}x{n}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def spectrum(self) -> Array:
        return np.fft.fft2(self.values)


def sample_function(grid: Grid2D, fn) -> GridFunction:
    """Sample a callable fn(x1, x2) on the grid."""
    x1, x2 = grid.coords()
    return GridFunction(grid, np.asarray(fn(x1, x2), dtype=np.complex128))


def l2_norm(u: GridFunction) -> float:
    """Midpoint-rule approximation of the L2 norm."""
    return float(np.sqrt(np.sum(np.abs(u.values) ** 2)) * u.grid.spacing)


def sup_norm(u: GridFunction, refine: bool = False) -> float:
    """Max of |u| over grid samples; a lower bound for the continuum sup.

    With refine=True a local quadratic fit around the argmax is used to
    sharpen the estimate by one order in the spacing.  Off by default:
    the acceptance tolerances absorb the O(spacing^2) sampling error.
    """
    a = np.abs(u.values)
    peak = float(a.max())
    if not refine:
        return peak
    n = u.grid.points_per_dim
    i, j = np.unravel_index(int(np.argmax(a)), a.shape)
    est = peak
    for axis_vals in (
        (a[(i - 1) % n, j], peak, a[(i + 1) % n, j]),
        (a[i, (j - 1) % n], peak, a[i, (j + 1) % n]),
    ):
        lo, mid, hi = axis_vals
        denom = lo - 2.0 * mid + hi
        if denom < 0:
            delta = 0.5 * (lo - hi) / denom
            est = max(est, mid - 0.25 * (lo - hi) * delta)
    return float(est)


def inner_product(u: GridFunction, v: GridFunction):
    """Midpoint-rule <u, v>, conjugate linear in the first argument."""
    if u.grid != v.grid:
        raise GridMismatchError("inner_product requires both functions on one grid")
    return complex(np.vdot(u.values, v.values) * u.grid.cell_area)


def weighted_norm(u: GridFunction, w) -> float:
    """L2 norm of w*u for a coefficient function w(x1, x2)."""
    x1, x2 = u.grid.coords()
    wv = np.asarray(w(x1, x2))
    return float(np.sqrt(np.sum(np.abs(wv * u.values) ** 2)) * u.grid.spacing)


def plancherel_defect(u: GridFunction) -> float:
    """Relative mismatch between the grid L2 norm and its DFT counterpart.

    Zero up to rounding by the discrete Parseval identity; exposed so the
    quadrature convention stays pinned by a test.
    """
    direct = l2_norm(u) ** 2
    if direct == 0.0:
        return 0.0
    n = u.grid.points_per_dim
    spectral = np.sum(np.abs(u.spectrum()) ** 2) * (u.grid.spacing ** 2) / n ** 2
    return float(abs(direct - spectral) / direct)


# ---------------------------------------------------------------------------
# coefficient fields


class MetricField:
    """Inverse-metric coefficients g^{ij}(x) with derivative data.

    Entries are closed-form callables evaluated on demand.  The field is
    immutable; transformed versions (rescaled, rotated) are new objects
    wrapping composed callables.
    """

    def __init__(self, g11, g12, g22, d_entries=None, constant=False, name="metric"):
        self.g11 = g11
        self.g12 = g12
        self.g22 = g22
        # d_entries: optional {(entry, axis): callable} giving first
        # derivatives of g^{11}, g^{12}, g^{22}; finite differences are
        # used when absent.
        self.d_entries = d_entries or {}
        self.constant = constant
        self.name = name

    @classmethod
    def identity(cls):
        one = lambda x1, x2: np.ones_like(np.asarray(x1, dtype=float))
        zero = lambda x1, x2: np.zeros_like(np.asarray(x1, dtype=float))
        d = {(e, a): zero for e in ("g11", "g12", "g22") for a in (0, 1)}
        return cls(one, zero, one, d_entries=d, constant=True, name="identity")

    @property
    def is_identity(self) -> bool:
        return self.name == "identity"

    def matrix_at(self, x1, x2):
        """Stacked 2x2 inverse-metric matrices, shape (..., 2, 2)."""
        a = np.asarray(self.g11(x1, x2), dtype=float)
        b = np.asarray(self.g12(x1, x2), dtype=float)
        c = np.asarray(self.g22(x1, x2), dtype=float)
        out = np.empty(a.shape + (2, 2))
        out[..., 0, 0] = a
        out[..., 0, 1] = b
        out[..., 1, 0] = b
        out[..., 1, 1] = c
        return out

    def det_bar_g(self, x1, x2):
        """Determinant of the metric g_{ij} = (g^{ij})^{-1}."""
        a = np.asarray(self.g11(x1, x2), dtype=float)
        b = np.asarray(self.g12(x1, x2), dtype=float)
        c = np.asarray(self.g22(x1, x2), dtype=float)
        det_inv = a * c - b * b
        return 1.0 / det_inv

    def positive_definite_on(self, grid: Grid2D) -> bool:
        x1, x2 = grid.coords()
        a = np.asarray(self.g11(x1, x2), dtype=float)
        b = np.asarray(self.g12(x1, x2), dtype=float)
        c = np.asarray(self.g22(x1, x2), dtype=float)
        return bool(np.all(a > 0) and np.all(a * c - b * b > 0))

    def entry_gradient(self, entry, x1, x2, step=1e-5):
        """Gradient of one inverse-metric entry, closed form when known."""
        if (entry, 0) in self.d_entries:
            gx = np.asarray(self.d_entries[(entry, 0)](x1, x2), dtype=float)
            gy = np.asarray(self.d_entries[(entry, 1)](x1, x2), dtype=float)
            return gx, gy
        f = getattr(self, entry)
        gx = (f(x1 + step, x2) - f(x1 - step, x2)) / (2 * step)
        gy = (f(x1, x2 + step) - f(x1, x2 - step)) / (2 * step)
        return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)

    def rescaled_arguments(self, c: float) -> "MetricField":
        """The field x -> g^{ij}(c x)."""
        if self.constant:
            return self
        mk = lambda f: (lambda x1, x2, f=f: f(c * x1, c * x2))
        d = {
            key: (lambda x1, x2, g=g: c * np.asarray(g(c * x1, c * x2), dtype=float))
            for key, g in self.d_entries.items()
        }
        return MetricField(mk(self.g11), mk(self.g12), mk(self.g22), d_entries=d,
                           constant=False, name=f"{self.name}(scaled {c:g})")

    def rotated(self, rot: Array) -> "MetricField":
        """Inverse metric in coordinates y with x = R y (R orthogonal)."""
        rot = np.asarray(rot, dtype=float)

        def entry(i, j):
            def f(y1, y2):
                x1 = rot[0, 0] * y1 + rot[0, 1] * y2
                x2 = rot[1, 0] * y1 + rot[1, 1] * y2
                g = self.matrix_at(x1, x2)
                return np.einsum("ab,...bc,cd->...ad", rot.T, g, rot)[..., i, j]
            return f

        return MetricField(entry(0, 0), entry(0, 1), entry(1, 1),
                           constant=self.constant, name=f"{self.name}(rotated)")


def _fd_gradient(v, x1, x2, step):
    gx = (v(x1 + step, x2) - v(x1 - step, x2)) / (2 * step)
    gy = (v(x1, x2 + step) - v(x1, x2 - step)) / (2 * step)
    return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)


def _fd_hessian(v, x1, x2, step):
    vxx = (v(x1 + step, x2) - 2 * v(x1, x2) + v(x1 - step, x2)) / step ** 2
    vyy = (v(x1, x2 + step) - 2 * v(x1, x2) + v(x1, x2 - step)) / step ** 2
    vxy = (v(x1 + step, x2 + step) - v(x1 + step, x2 - step)
           - v(x1 - step, x2 + step) + v(x1 - step, x2 - step)) / (4 * step ** 2)
    return (np.asarray(vxx, dtype=float), np.asarray(vxy, dtype=float),
            np.asarray(vyy, dtype=float))


class PotentialField:
    """Real potential V(x) with gradient and Hessian callables.

    Polynomial potentials carry exact partial derivatives of every order,
    which the normalization report uses for its C_N constants.  Generic
    callables fall back to central finite differences.
    """

    def __init__(self, v, grad=None, hess=None, partures=None, name="potential",
                 fd_step=1e-5):
        self.v = v
        self._grad = grad
        self._hess = hess
        # partures: optional callable alpha -> callable for the mixed
        # partial of multi-index alpha = (a1, a2).
        self._partures = partures
        self.name = name
        self.fd_step = fd_step

    # -- constructors -------------------------------------------------

    @classmethod
    def from_polynomial(cls, coeffs, name="poly"):
        """Potential sum c * x1^p1 * x2^p2 over coeffs {(p1, p2): c}."""
        terms = {tuple(int(p) for p in k): float(c) for k, c in coeffs.items()}

        def partial_factory(alpha):
            a1, a2 = alpha

            def df(x1, x2):
                x1 = np.asarray(x1, dtype=float)
                x2 = np.asarray(x2, dtype=float)
                out = np.zeros(np.broadcast(x1, x2).shape)
                for (p1, p2), c in terms.items():
                    if p1 < a1 or p2 < a2:
                        continue
                    fac = c
                    for m in range(a1):
                        fac *= p1 - m
                    for m in range(a2):
                        fac *= p2 - m
                    out = out + fac * x1 ** (p1 - a1) * x2 ** (p2 - a2)
                return out

            return df

        v = partial_factory((0, 0))
        gx, gy = partial_factory((1, 0)), partial_factory((0, 1))
        hxx, hxy, hyy = (partial_factory(a) for a in ((2, 0), (1, 1), (0, 2)))
        return cls(
            v,
            grad=lambda x1, x2: (gx(x1, x2), gy(x1, x2)),
            hess=lambda x1, x2: (hxx(x1, x2), hxy(x1, x2), hyy(x1, x2)),
            partures=partial_factory,
            name=name,
        )

    @classmethod
    def zero(cls):
        return cls.from_polynomial({}, name="zero")

    @classmethod
    def constant(cls, c):
        return cls.from_polynomial({(0, 0): c}, name=f"constant({c:g})")

    @classmethod
    def linear(cls, slope=0.45):
        # slope 0.45 keeps sup_{|x|<2} |V| + |dV| = 2.45*slope under 2.
        return cls.from_polynomial({(1, 0): slope}, name="linear")

    @classmethod
    def quadratic_well(cls):
        # 1 - 0.004 |x|^2: |V| near 1 on the unit ball, |d2V| = 0.008.
        return cls.from_polynomial(
            {(0, 0): 1.0, (2, 0): -0.004, (0, 2): -0.004}, name="quadratic-well"
        )

    @classmethod
    def saddle(cls):
        return cls.from_polynomial(
            {(2, 0): 0.005, (0, 2): -0.005}, name="saddle"
        )

    @classmethod
    def harmonic(cls, shift=0.0):
        """|x|^2 - shift, the oscillator well used by the eigensolver runs."""
        return cls.from_polynomial(
            {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -shift}, name="harmonic"
        )

    # -- evaluation ----------------------------------------------------

    def __call__(self, x1, x2):
        return np.asarray(self.v(x1, x2), dtype=float)

    def grad(self, x1, x2):
        if self._grad is not None:
            gx, gy = self._grad(x1, x2)
            return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)
        return _fd_gradient(self.v, x1, x2, self.fd_step)

    def grad_norm(self, x1, x2):
        gx, gy = self.grad(x1, x2)
        return np.hypot(gx, gy)

    def hess(self, x1, x2):
        if self._hess is not None:
            a, b, c = self._hess(x1, x2)
            return (np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                    np.asarray(c, dtype=float))
        return _fd_hessian(self.v, x1, x2, self.fd_step)

    def hess_norm(self, x1, x2):
        """Spectral norm of the 2x2 Hessian (closed form for symmetric 2x2)."""
        a, b, c = self.hess(x1, x2)
        half_tr = 0.5 * (a + c)
        rad = np.sqrt((0.5 * (a - c)) ** 2 + b ** 2)
        return np.maximum(np.abs(half_tr + rad), np.abs(half_tr - rad))

    def partial(self, alpha, x1, x2):
        """Mixed partial of multi-index alpha, exact for polynomials."""
        if self._partures is not None:
            return np.asarray(self._partures(alpha)(x1, x2), dtype=float)
        a1, a2 = alpha
        step = max(self.fd_step, 1e-2) if a1 + a2 > 2 else self.fd_step

        def d(f, axis):
            if axis == 0:
                return lambda x1, x2: (f(x1 + step, x2) - f(x1 - step, x2)) / (2 * step)
            return lambda x1, x2: (f(x1, x2 + step) - f(x1, x2 - step)) / (2 * step)

        f = self.v
        for _ in range(a1):
            f = d(f, 0)
        for _ in range(a2):
            f = d(f, 1)
        return np.asarray(f(x1, x2), dtype=float)

    # -- transforms (all exact via chain rule) -------------------------

    def scaled(self, value_factor: float, arg_factor: float, name=None) -> "PotentialField":
        """The potential value_factor * V(arg_factor * x)."""
        s, c = float(value_factor), float(arg_factor)
        v = lambda x1, x2: s * np.asarray(self.v(c * x1, c * x2), dtype=float)
        grad = lambda x1, x2: tuple(s * c * g for g in self.grad(c * x1, c * x2))
        hess = lambda x1, x2: tuple(s * c * c * e for e in self.hess(c * x1, c * x2))
        partures = None
        if self._partures is not None:
            def partures(alpha, _p=self._partures):
                a1, a2 = alpha
                base = _p(alpha)
                return lambda x1, x2: s * c ** (a1 + a2) * np.asarray(
                    base(c * x1, c * x2), dtype=float)
        return PotentialField(v, grad=grad, hess=hess, partures=partures,
                              name=name or f"{self.name}(x{s:g},arg{c:g})")

    def shifted(self, offset: float) -> "PotentialField":
        v = lambda x1, x2: np.asarray(self.v(x1, x2), dtype=float) + offset
        partures = None
        if self._partures is not None:
            def partures(alpha, _p=self._partures):
                base = _p(alpha)
                if alpha == (0, 0):
                    return lambda x1, x2: np.asarray(base(x1, x2), dtype=float) + offset
                return base
        return PotentialField(v, grad=self._grad or (lambda x1, x2: self.grad(x1, x2)),
                              hess=self._hess or (lambda x1, x2: self.hess(x1, x2)),
                              partures=partures, name=f"{self.name}+{offset:g}")

    def translated(self, x0) -> "PotentialField":
        t1, t2 = float(x0[0]), float(x0[1])
        v = lambda x1, x2: np.asarray(self.v(x1 + t1, x2 + t2), dtype=float)
        grad = lambda x1, x2: self.grad(x1 + t1, x2 + t2)
        hess = lambda x1, x2: self.hess(x1 + t1, x2 + t2)
        partures = None
        if self._partures is not None:
            def partures(alpha, _p=self._partures):
                base = _p(alpha)
                return lambda x1, x2: np.asarray(base(x1 + t1, x2 + t2), dtype=float)
        return PotentialField(v, grad=grad, hess=hess, partures=partures,
                              name=f"{self.name}@({t1:g},{t2:g})")

    def rotated(self, rot: Array) -> "PotentialField":
        """Potential in coordinates y with x = R y (R orthogonal)."""
        rot = np.asarray(rot, dtype=float)

        def xy(y1, y2):
            return rot[0, 0] * y1 + rot[0, 1] * y2, rot[1, 0] * y1 + rot[1, 1] * y2

        def v(y1, y2):
            return np.asarray(self.v(*xy(y1, y2)), dtype=float)

        def grad(y1, y2):
            gx, gy = self.grad(*xy(y1, y2))
            return rot[0, 0] * gx + rot[1, 0] * gy, rot[0, 1] * gx + rot[1, 1] * gy

        def hess(y1, y2):
            a, b, c = self.hess(*xy(y1, y2))
            r = rot
            aa = r[0, 0] * (a * r[0, 0] + b * r[1, 0]) + r[1, 0] * (b * r[0, 0] + c * r[1, 0])
            bb = r[0, 0] * (a * r[0, 1] + b * r[1, 1]) + r[1, 0] * (b * r[0, 1] + c * r[1, 1])
            cc = r[0, 1] * (a * r[0, 1] + b * r[1, 1]) + r[1, 1] * (b * r[0, 1] + c * r[1, 1])
            return aa, bb, cc

        return PotentialField(v, grad=grad, hess=hess, name=f"{self.name}(rotated)")


BUILTIN_POTENTIALS = {
    "zero": PotentialField.zero,
    "linear": PotentialField.linear,
    "quadratic-well": PotentialField.quadratic_well,
    "saddle": PotentialField.saddle,
}


# ---------------------------------------------------------------------------
# bump profiles


def _plateau(t, center_lo, center_hi, width):
    """Unit plateau: indicator [center_lo, center_hi] mollified by a
    Gaussian of standard deviation `width`."""
    t = np.asarray(t, dtype=float)
    return 0.5 * (erf((t - center_lo) / (width * _SQRT2))
                  - erf((t - center_hi) / (width * _SQRT2)))


@dataclass(frozen=True)
class BumpProfile:
    """The cutoff pair (psi, chi) driving the frequency-box synthesis.

    chi is a mollified plateau of total integral exactly 1, equal to 1 at
    the origin, valued in [0, 1], supported in [-1, 1].  psi has integral
    exactly 1, values in [0, 2], support in [1, 2].  Both are Gaussian
    mollifications of indicators, clipped to exact zero outside their
    stated supports; the clipped values are below 1e-16 of the peak, so
    the clip is invisible at working precision while making the discrete
    frequency supports literally exact.

    The Gaussian mollifier gives closed-form Fourier transforms
        chi_hat(y) = 2 sin(y/2)/y * exp(-w_chi^2 y^2 / 2)
        |psi_hat(y)| = |4 sin(y/4)/y| * exp(-w_psi^2 y^2 / 2)
    used for aliasing/tail bounds.
    """

    w_chi: float = 0.06
    w_psi: float = 0.03
    chi_support: tuple = (-1.0, 1.0)
    psi_support: tuple = (1.0, 2.0)
    reference_points: int = 1 << 14
    samples_chi: Array = field(init=False, repr=False, compare=False)
    samples_psi: Array = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = self.reference_grid()
        object.__setattr__(self, "samples_chi", self.chi(t))
        object.__setattr__(self, "samples_psi", self.psi(t))

    def reference_grid(self) -> Array:
        return np.linspace(-2.0, 3.0, self.reference_points, endpoint=False)

    # -- chi -----------------------------------------------------------

    def chi(self, t):
        t = np.asarray(t, dtype=float)
        v = _plateau(t, -0.5, 0.5, self.w_chi)
        return np.where((t > self.chi_support[0]) & (t < self.chi_support[1]), v, 0.0)

    def chi_prime(self, t):
        t = np.asarray(t, dtype=float)
        w = self.w_chi
        g = lambda s: np.exp(-s * s / (2 * w * w)) / (w * math.sqrt(2 * math.pi))
        v = g(t + 0.5) - g(t - 0.5)
        return np.where((t > self.chi_support[0]) & (t < self.chi_support[1]), v, 0.0)

    def chi_second(self, t):
        t = np.asarray(t, dtype=float)
        w = self.w_chi
        g = lambda s: -s / (w * w) * np.exp(-s * s / (2 * w * w)) / (w * math.sqrt(2 * math.pi))
        v = g(t + 0.5) - g(t - 0.5)
        return np.where((t > self.chi_support[0]) & (t < self.chi_support[1]), v, 0.0)

    def chi_with_derivs(self, t):
        """(chi, chi', chi'') sharing the transcendental evaluations."""
        t = np.asarray(t, dtype=float)
        w = self.w_chi
        inside = (t > self.chi_support[0]) & (t < self.chi_support[1])
        val = _plateau(t, -0.5, 0.5, w)
        gp = np.exp(-(t + 0.5) ** 2 / (2 * w * w)) / (w * math.sqrt(2 * math.pi))
        gm = np.exp(-(t - 0.5) ** 2 / (2 * w * w)) / (w * math.sqrt(2 * math.pi))
        d1 = gp - gm
        d2 = (-(t + 0.5) * gp + (t - 0.5) * gm) / (w * w)
        zero = 0.0
        return (np.where(inside, val, zero), np.where(inside, d1, zero),
                np.where(inside, d2, zero))

    def chi_hat_bound(self, y):
        """Upper bound for |chi_hat| at frequency y > 0."""
        y = np.maximum(np.asarray(y, dtype=float), 1e-300)
        return np.minimum(1.0, 2.0 / y) * np.exp(-0.5 * (self.w_chi * y) ** 2)

    # -- psi -----------------------------------------------------------

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        v = 2.0 * _plateau(t, 1.25, 1.75, self.w_psi)
        return np.where((t > self.psi_support[0]) & (t < self.psi_support[1]), v, 0.0)

    def psi_prime(self, t):
        t = np.asarray(t, dtype=float)
        w = self.w_psi
        g = lambda s: np.exp(-s * s / (2 * w * w)) / (w * math.sqrt(2 * math.pi))
        v = 2.0 * (g(t - 1.25) - g(t - 1.75))
        return np.where((t > self.psi_support[0]) & (t < self.psi_support[1]), v, 0.0)

    def psi_with_derivs(self, t):
        """(psi, psi') sharing the transcendental evaluations."""
        t = np.asarray(t, dtype=float)
        w = self.w_psi
        inside = (t > self.psi_support[0]) & (t < self.psi_support[1])
        val = 2.0 * _plateau(t, 1.25, 1.75, w)
        gp = np.exp(-(t - 1.25) ** 2 / (2 * w * w)) / (w * math.sqrt(2 * math.pi))
        gm = np.exp(-(t - 1.75) ** 2 / (2 * w * w)) / (w * math.sqrt(2 * math.pi))
        d1 = 2.0 * (gp - gm)
        zero = 0.0
        return np.where(inside, val, zero), np.where(inside, d1, zero)

    def psi_hat_bound(self, y):
        y = np.maximum(np.asarray(y, dtype=float), 1e-300)
        return np.minimum(1.0, 4.0 / y) * np.exp(-0.5 * (self.w_psi * y) ** 2)

    # -- diagnostics ----------------------------------------------------

    def integrals(self):
        """Reference-grid quadratures of chi, psi and their squares."""
        t = self.reference_grid()
        dt = t[1] - t[0]
        return {
            "chi": float(np.sum(self.samples_chi) * dt),
            "psi": float(np.sum(self.samples_psi) * dt),
            "chi_sq": float(np.sum(self.samples_chi ** 2) * dt),
            "psi_sq": float(np.sum(self.samples_psi ** 2) * dt),
        }

    def validate(self, tol=1e-10):
        ints = self.integrals()
        checks = {
            "chi_integral": abs(ints["chi"] - 1.0) <= tol,
            "psi_integral": abs(ints["psi"] - 1.0) <= tol,
            "chi_at_zero": abs(self.chi(0.0) - 1.0) <= tol,
            "chi_range": bool(np.all(self.samples_chi >= 0) and np.all(self.samples_chi <= 1)),
            "psi_range": bool(np.all(self.samples_psi >= 0) and np.all(self.samples_psi <= 2)),
            "chi_support": bool(np.all(self.chi(np.array([-1.0, 1.0, -1.5, 2.0])) == 0)),
            "psi_support": bool(np.all(self.psi(np.array([0.5, 1.0, 2.0, 2.5])) == 0)),
        }
        return checks


def default_profiles() -> BumpProfile:
    return BumpProfile()
