"""Normalization conditions, rescaling maps, and the case classifier.

The normalization demanded of a metric/potential pair on the double ball
B* = {|x| < 2} is

    (1)  g^{ij}(0) = delta^{ij}
    (2)  sup |V| + |dV| <= 2   and   sup |d^2 V| + sum_{ij} |d g^{ij}| <= 0.01

Pairs failing (2) are repaired by V -> c V(c x), g -> g(c x) for a
constant c <= 1, which multiplies h by c^{-1/2} (absorbed into the final
estimate's constant).

For a normalized pair, every point of the unit ball falls into exactly
one of four regimes depending on |V| vs h and |dV| vs 8 sqrt(h) or
9 sqrt(|V|); each regime comes with a rescaling map that reduces the
sup-norm question to a unit-scale one, and with a ball radius on which
the resulting bound holds.  classify_case reproduces that decision
tree with the verbatim thresholds; cover_ball tiles the unit ball with
the resulting balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._zoom import evaluate_scaled
from .errors import CoverageError, NormalizationError, QlabError
from .field import Grid2D, GridFunction, MetricField, PotentialField

Array = np.ndarray


@dataclass
class NormalizationReport:
    cond1_ok: bool
    cond2_values: tuple          # (sup |V|+|dV|, sup |d2V| + sum |dg|)
    cond2_ok: bool
    cond3_constants: dict        # N -> C_N for N <= 8
    suggested_c: float | None    # rescale constant when cond2 fails

    def passed(self) -> bool:
        return self.cond1_ok and self.cond2_ok

    def to_dict(self) -> dict:
        return {
            "cond1_ok": self.cond1_ok,
            "cond2_value_first": self.cond2_values[0],
            "cond2_value_second": self.cond2_values[1],
            "cond2_ok": self.cond2_ok,
            "cond3_constants": {str(k): v for k, v in self.cond3_constants.items()},
            "suggested_c": self.suggested_c,
        }


def _disc_samples(radius: float, spacing: float):
    n = int(math.floor(2 * radius / spacing)) + 1
    x = np.linspace(-radius, radius, n)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    mask = x1 ** 2 + x2 ** 2 < radius ** 2
    return x1[mask], x2[mask]


def _cond2_values(metric: MetricField, potential: PotentialField, spacing=0.01):
    x1, x2 = _disc_samples(2.0, spacing)
    v = np.abs(potential(x1, x2))
    dv = potential.grad_norm(x1, x2)
    first = float(np.max(v + dv))
    d2v = potential.hess_norm(x1, x2)
    dg = np.zeros_like(d2v)
    if not metric.constant:
        for entry, mult in (("g11", 1.0), ("g12", 2.0), ("g22", 1.0)):
            gx, gy = metric.entry_gradient(entry, x1, x2)
            dg += mult * np.hypot(gx, gy)
    second = float(np.max(d2v + dg))
    return first, second


def _cond3_constants(metric, potential, n_max=8, spacing=0.05):
    """C_N = sup over |alpha| <= N of |d^alpha V| + sum |d^alpha g^{ij}|.

    Exact for polynomial potentials; finite differences otherwise (the
    constants are reported diagnostics, not acceptance gates).
    """
    x1, x2 = _disc_samples(2.0, spacing)
    sups = {}
    best = 0.0
    for order in range(n_max + 1):
        worst = 0.0
        for a1 in range(order + 1):
            a2 = order - a1
            term = np.abs(potential.partial((a1, a2), x1, x2))
            if metric.constant:
                if order == 0:
                    g0 = metric.matrix_at(0.0, 0.0)
                    term = term + np.sum(np.abs(g0))
            else:
                step = 0.05
                for entry, mult in (("g11", 1.0), ("g12", 2.0), ("g22", 1.0)):
                    f = getattr(metric, entry)
                    term = term + mult * np.abs(
                        _fd_mixed_partial(f, (a1, a2), x1, x2, step))
            worst = max(worst, float(np.max(term)))
        best = max(best, worst)
        sups[order] = best
    return sups


def _fd_mixed_partial(f, alpha, x1, x2, step):
    a1, a2 = alpha
    g = f
    for _ in range(a1):
        g = (lambda fn: lambda u, v: (fn(u + step, v) - fn(u - step, v)) / (2 * step))(g)
    for _ in range(a2):
        g = (lambda fn: lambda u, v: (fn(u, v + step) - fn(u, v - step)) / (2 * step))(g)
    return np.asarray(g(x1, x2), dtype=float)


def verify_normalization(metric: MetricField, potential: PotentialField,
                         spacing: float = 0.01, n_max: int = 8) -> NormalizationReport:
    """Check conditions (1)-(2) on B* and report the C_N constants.

    When (2) fails, suggested_c is the largest dyadic-bisection constant
    c <= 1 for which the rescaled pair passes with margin.
    """
    g0 = metric.matrix_at(0.0, 0.0)
    cond1 = bool(np.max(np.abs(g0 - np.eye(2))) <= 1e-10)
    first, second = _cond2_values(metric, potential, spacing)
    cond2 = first <= 2.0 and second <= 0.01
    suggested = None
    if not cond2:
        lo, hi = 0.0, 1.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            m2, p2, _ = rescale_to_normalization(metric, potential, mid)
            f2, s2 = _cond2_values(m2, p2, spacing=0.02)
            if f2 <= 2.0 * 0.95 and s2 <= 0.01 * 0.95:
                lo = mid
            else:
                hi = mid
        suggested = lo
    return NormalizationReport(
        cond1_ok=cond1,
        cond2_values=(first, second),
        cond2_ok=cond2,
        cond3_constants=_cond3_constants(metric, potential, n_max),
        suggested_c=suggested,
    )


def rescale_to_normalization(metric: MetricField, potential: PotentialField,
                             c: float):
    """The reduction V -> c V(c x), g -> g(c x) for 0 < c <= 1.

    Substituting u~(x) = c u(c x) turns a weak quasimode at parameter h
    into one at h~ = c^{-1/2} h (with the residual bound improved by
    c^{3/2}), so the returned h_multiplier is c^{-1/2}.
    """
    if not 0 < c <= 1:
        raise ValueError(f"rescale constant must lie in (0, 1], got {c}")
    return (metric.rescaled_arguments(c),
            potential.scaled(c, c, name=f"{potential.name}(norm c={c:g})"),
            c ** -0.5)


# ---------------------------------------------------------------------------
# rescaling maps for the case analysis


def _scaled_function(u: GridFunction, s: float, target: Grid2D | None):
    """x -> s * u(s x), the L2-isometric zoom in two dimensions.

    Without a target grid the samples are reinterpreted on the scaled box
    (exact); with one, the periodic band-limited interpolant is evaluated
    there (exact to rounding for band-limited u).
    """
    if target is None:
        new_grid = Grid2D(u.grid.half_width / s, u.grid.points_per_dim)
        return GridFunction(new_grid, s * np.asarray(u.values))
    if target.half_width * s > u.grid.half_width * (1 + 1e-12):
        raise ValueError("target grid reaches outside the source box")
    return GridFunction(target, s * evaluate_scaled(u, s, target))


def rescale_small_potential(u: GridFunction, metric: MetricField, h: float,
                            target_grid: Grid2D | None = None):
    """Zoom to unit scale when the potential is negligible (|V| <= 99 h
    on |x| <= 2 sqrt(h), certified by the caller).

    Returns (u~, g~) with u~(x) = sqrt(h) u(sqrt(h) x) and g~ = g(sqrt(h) x).
    On the zoomed ball |x| < 2 the rescaled function satisfies
    ||Lap_{g~} u~|| <= 100 and ||u~|| <= 1 whenever the hypotheses hold;
    the rescaled Laplacian norm equals h times the original one.
    """
    s = math.sqrt(h)
    return _scaled_function(u, s, target_grid), metric.rescaled_arguments(s)


def rescale_elliptic(u: GridFunction, metric: MetricField,
                     potential: PotentialField, h: float, c: float,
                     target_grid: Grid2D | None = None):
    """Zoom for the regime c/2 <= |V| <= 2c on |x| <= 2 sqrt(c), h <= c.

    u~ = sqrt(c) u(sqrt(c) x), g~ = g(sqrt(c) x), V~ = c^{-1} V(sqrt(c) x),
    h~ = h / c <= 1.  The rescaled residual over |x| < 2 equals c^{-1}
    times the original over |x| < 2 sqrt(c).
    """
    if c < h:
        raise ValueError(f"need h <= c <= 1, got h={h:g}, c={c:g}")
    if c > 1:
        raise ValueError(f"need c <= 1, got {c:g}")
    s = math.sqrt(c)
    return (_scaled_function(u, s, target_grid),
            metric.rescaled_arguments(s),
            potential.scaled(1.0 / c, s, name=f"{potential.name}(elliptic c={c:g})"),
            h / c)


def rotation_to_gradient(potential: PotentialField, x0=(0.0, 0.0)) -> Array:
    """Orthogonal matrix R such that V(R y) has gradient along e1 at 0."""
    gx, gy = potential.grad(float(x0[0]), float(x0[1]))
    norm = math.hypot(float(gx), float(gy))
    if norm == 0:
        raise ValueError("gradient vanishes; no rotation defined")
    d1, d2 = float(gx) / norm, float(gy) / norm
    return np.array([[d1, -d2], [d2, d1]])


def rescale_gradient(u: GridFunction | None, metric: MetricField,
                     potential: PotentialField, h: float,
                     target_grid: Grid2D | None = None):
    """Zoom for the gradient-dominated regime |V(0)| <= h, |dV(0)| >= 8 sqrt(h).

    Steps: absorb the O(h) constant V(0), rotate the gradient onto e1,
    halve V by factors of 4 until beta = |dV(0)| <= 1/2 (the factor is
    absorbed into the final constant; h is left unchanged), then map
    u~ = beta u(beta x), g~ = g(beta x), V~ = beta^{-2} V(beta x),
    h~ = beta^{-2} h < 1.  Afterwards V~(0) = 0 and |dV~(0)| = 1.

    Returns (u~, g~, V~, h~, info) where info records the absorbed
    constant and the number of /4 divisions.
    """
    v0 = float(potential(0.0, 0.0))
    if abs(v0) > h * (1 + 1e-12):
        raise ValueError(f"|V(0)| = {abs(v0):g} exceeds h = {h:g}")
    pot = potential.shifted(-v0)
    beta = float(pot.grad_norm(0.0, 0.0))
    if beta < 8.0 * math.sqrt(h) * (1 - 1e-12):
        raise ValueError(f"|dV(0)| = {beta:g} below the 8 sqrt(h) threshold")
    rot = rotation_to_gradient(pot)
    pot = pot.rotated(rot)
    met = metric.rotated(rot)
    divisions = 0
    while beta > 0.5:
        pot = pot.scaled(0.25, 1.0, name=pot.name + "/4")
        beta *= 0.25
        divisions += 1
    h_new = h / beta ** 2
    if h_new >= 1.0:
        raise ValueError(f"rescaled h = {h_new:g} not below 1; beta too small")
    pot_new = pot.scaled(beta ** -2, beta, name=f"{potential.name}(gradient)")
    met_new = met.rescaled_arguments(beta)
    u_new = None if u is None else _scaled_function(u, beta, target_grid)
    info = {
        "beta": beta,
        "absorbed_constant": v0,
        "v_divisions_by_4": divisions,
        "h_new": h_new,
        "grad_at_origin": float(pot_new.grad_norm(0.0, 0.0)),
    }
    return u_new, met_new, pot_new, h_new, info


# ---------------------------------------------------------------------------
# case classification


@dataclass
class CaseDecision:
    """One regime decision at a point of the unit ball.

    radius is the ball on which the sup bound is guaranteed (capped at
    1/2, the largest radius the covering statement uses); beta_or_c is
    the rescale parameter: |dV| for the gradient case, |V| for the
    elliptic case.
    """

    case_id: int
    center: tuple
    radius: float
    beta_or_c: float
    translation: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "center": list(self.center),
            "radius": self.radius,
            "beta_or_c": self.beta_or_c,
            "translation": None if self.translation is None else list(self.translation),
        }


def _classify_values(v0: float, g0: float, h: float):
    """Shared threshold logic; ties go to the lower-numbered case."""
    rth = math.sqrt(h)
    if abs(v0) <= h:
        if g0 <= 8.0 * rth:
            return 1
        return 2
    if g0 <= 9.0 * math.sqrt(abs(v0)):
        return 3
    return 4


def _zero_crossing(potential: PotentialField, x0, max_iter=50, tol=1e-12):
    """1D Newton along the gradient direction for a zero of V."""
    x = np.array(x0, dtype=float)
    gx, gy = potential.grad(x[0], x[1])
    d = np.array([float(gx), float(gy)])
    d /= np.linalg.norm(d)
    t = 0.0
    for _ in range(max_iter):
        p = x + t * d
        v = float(potential(p[0], p[1]))
        if abs(v) <= tol:
            return x + t * d
        gx, gy = potential.grad(p[0], p[1])
        slope = float(gx) * d[0] + float(gy) * d[1]
        if slope == 0:
            break
        t -= v / slope
    raise QlabError("zero search did not converge; hypotheses violated")


def classify_case(potential: PotentialField, h: float, x0=(0.0, 0.0),
                  newton_tol=1e-12) -> CaseDecision:
    """Classify a point into one of the four regimes.

        1: |V| <= h,  |dV| <= 8 sqrt(h)        -> r = sqrt(h)
        2: |V| <= h,  |dV| >  8 sqrt(h)        -> r = |dV|
        3: |V| >  h,  |dV| <= 9 sqrt(|V|)      -> r = sqrt(|V|) / 40
        4: |V| >  h,  |dV| >  9 sqrt(|V|)      -> zero of V within
           sqrt(|V|)/8, reduce to case 2 there; r = 0.9998 |dV|

    All radii are capped at 1/2.  Requires h <= 1/4 and |x0| < 1.
    """
    if h > 0.25:
        raise ValueError(f"classification assumes h <= 1/4, got {h:g}")
    x0 = (float(x0[0]), float(x0[1]))
    if math.hypot(*x0) >= 1.0:
        raise ValueError(f"point {x0} outside the open unit ball")
    v0 = float(potential(x0[0], x0[1]))
    g0 = float(potential.grad_norm(x0[0], x0[1]))
    case = _classify_values(v0, g0, h)
    if case == 1:
        return CaseDecision(1, x0, min(math.sqrt(h), 0.5), g0)
    if case == 2:
        return CaseDecision(2, x0, min(g0, 0.5), g0)
    if case == 3:
        return CaseDecision(3, x0, min(math.sqrt(abs(v0)) / 40.0, 0.5), abs(v0))
    zero = _zero_crossing(potential, x0, tol=newton_tol)
    dist = math.hypot(zero[0] - x0[0], zero[1] - x0[1])
    if dist > math.sqrt(abs(v0)) / 8.0 * (1 + 1e-9):
        raise QlabError(
            f"zero of V at distance {dist:g} > sqrt(|V|)/8 = "
            f"{math.sqrt(abs(v0)) / 8.0:g}; curvature hypothesis violated")
    return CaseDecision(4, x0, min(0.9998 * g0, 0.5), g0,
                        translation=(float(zero[0]), float(zero[1])))


def cover_ball(potential: PotentialField, h: float, sample_points: int = 400,
               max_balls: int = 200000) -> list:
    """Greedy ball cover of a sample grid of the open unit ball.

    Deterministic: sweeps the sample points in row-major order, classifies
    the first uncovered point, and marks everything inside the resulting
    ball as covered.  Every ball covers at least its own center, so the
    sweep terminates with full coverage of the sample (or hits max_balls
    and raises).
    """
    xs = np.linspace(-1.0, 1.0, sample_points)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    inside = x1 ** 2 + x2 ** 2 < 1.0
    pts = np.column_stack([x1[inside], x2[inside]])
    covered = np.zeros(len(pts), dtype=bool)
    decisions = []
    cursor = 0
    while True:
        while cursor < len(pts) and covered[cursor]:
            cursor += 1
        if cursor >= len(pts):
            break
        if len(decisions) >= max_balls:
            raise CoverageError(
                f"cover exceeded {max_balls} balls with points still uncovered")
        cx, cy = pts[cursor]
        dec = classify_case(potential, h, (cx, cy))
        decisions.append(dec)
        r2 = dec.radius ** 2
        nearby = ~covered
        d2 = (pts[nearby, 0] - cx) ** 2 + (pts[nearby, 1] - cy) ** 2
        sub = np.flatnonzero(nearby)
        covered[sub[d2 <= r2]] = True
    return decisions


def verify_cover(decisions: list, sample_points: int = 400) -> bool:
    """Brute-force membership check of a ball cover on the sample grid."""
    xs = np.linspace(-1.0, 1.0, sample_points)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    inside = x1 ** 2 + x2 ** 2 < 1.0
    pts = np.column_stack([x1[inside], x2[inside]])
    covered = np.zeros(len(pts), dtype=bool)
    for dec in decisions:
        cx, cy = dec.center
        d2 = (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2
        covered |= d2 <= dec.radius ** 2
    return bool(np.all(covered))
