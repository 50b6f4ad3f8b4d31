"""Sweeps over decreasing h: scaling-law fits and the log-factor test.

A sweep builds one quasimode family per h value, records L2/sup norms
and the certifying residual, then fits

  * the growth exponent: OLS of log sup against log h, and
  * the log-factor discriminant: OLS of (sup * sqrt(h))^2 against
    ln(1/h); a significantly positive slope means log-corrected growth,
    slope statistically zero means a pure power law.

Records whose residual exceeds the experiment's certificate constant
times h are excluded from fits and flagged; fits never silently mix
certified and uncertified records.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import counterexample as ce
from . import spectral
from .errors import QlabError
from .field import Grid2D, GridFunction, MetricField, PotentialField, sup_norm
from .operator import assemble, radial_cutoff, recommended_fd_points

LOG_CONVENTION = "natural"


@dataclass
class ScalingRecord:
    h: float
    l2_norm: float
    sup_norm: float
    residual_l2: float
    extra: dict = field(default_factory=dict)
    certified: bool = True
    failure: str | None = None

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "l2_norm": self.l2_norm,
            "sup_norm": self.sup_norm,
            "residual_l2": self.residual_l2,
            "extra": dict(sorted(self.extra.items())),
            "certified": self.certified,
            "failure": self.failure,
        }


@dataclass
class ScalingReport:
    experiment: str
    records: list
    certificate_constant: float
    exponent: float | None = None
    exponent_stderr: float | None = None
    log_factor_slope: float | None = None
    log_factor_stderr: float | None = None
    log_factor_tstat: float | None = None
    log_factor_pvalue: float | None = None
    verdict: str = "insufficient-data"
    notes: list = field(default_factory=list)

    def certified_records(self):
        return [r for r in self.records if r.certified and r.failure is None]

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "certificate_constant": self.certificate_constant,
            "records": [r.to_dict() for r in self.records],
            "fits": None if self.exponent is None else {
                "exponent": self.exponent,
                "exponent_stderr": self.exponent_stderr,
                "log_factor_slope": self.log_factor_slope,
                "log_factor_stderr": self.log_factor_stderr,
                "log_factor_tstat": self.log_factor_tstat,
                "log_factor_pvalue": self.log_factor_pvalue,
            },
            "verdict": self.verdict,
            "notes": list(self.notes),
            "metadata": {"log_convention": LOG_CONVENTION},
        }


def fit_exponent(records):
    """OLS slope of log sup_norm against log h, with its standard error."""
    pts = [(r.h, r.sup_norm) for r in records if r.sup_norm > 0]
    if len(pts) < 5:
        raise ValueError(f"exponent fit needs >= 5 records, got {len(pts)}")
    h = np.array([p[0] for p in pts])
    s = np.array([p[1] for p in pts])
    if np.ptp(np.log(h)) == 0:
        raise ValueError("degenerate design: all h equal")
    res = stats.linregress(np.log(h), np.log(s))
    return float(res.slope), float(res.stderr)


def test_log_factor(records):
    """OLS of (sup * sqrt(h))^2 against ln(1/h) -> (slope, pvalue).

    Positive significant slope: log-corrected growth.  Slope
    indistinguishable from zero: pure h^{-1/2} power law.
    """
    pts = [(r.h, r.sup_norm) for r in records if r.sup_norm > 0]
    if len(pts) < 5:
        raise ValueError(f"log-factor test needs >= 5 records, got {len(pts)}")
    h = np.array([p[0] for p in pts])
    s = np.array([p[1] for p in pts])
    y = (s * np.sqrt(h)) ** 2
    x = np.log(1.0 / h)
    res = stats.linregress(x, y)
    return float(res.slope), float(res.pvalue)


def _log_factor_full(records):
    pts = [(r.h, r.sup_norm) for r in records if r.sup_norm > 0]
    h = np.array([p[0] for p in pts])
    s = np.array([p[1] for p in pts])
    res = stats.linregress(np.log(1.0 / h), (s * np.sqrt(h)) ** 2)
    t = res.slope / res.stderr if res.stderr > 0 else math.inf
    return float(res.slope), float(res.stderr), float(t), float(res.pvalue)


# ---------------------------------------------------------------------------
# experiment builders


def _coherent_window_cluster(P, h, width_constant, max_count, seed):
    """Cluster with coefficients proportional to the eigenfunction values
    at the origin: the combination maximizing |u(0)| among unit vectors."""
    pairs = spectral.interior_eigenpairs(
        P, width_constant=width_constant, max_count=max_count, seed=seed)
    if not pairs:
        raise QlabError(f"no eigenvalues in the window at h={h:g}")
    n = P.grid.points_per_dim
    vals0 = np.array([w.values[n // 2, n // 2] for _, w in pairs])
    norm = np.linalg.norm(vals0)
    coeffs = (np.conj(vals0) / norm) if norm > 0 else np.full(
        len(pairs), 1.0 / math.sqrt(len(pairs)))
    cluster, u = spectral.build_cluster(pairs, coeffs, width_constant)
    resid = float(np.sqrt(np.sum(np.abs(coeffs) ** 2 * cluster.eigenvalues ** 2)))
    return cluster, u, resid


def _torus_cluster_record(h, params):
    st = spectral.torus_cluster_stats(h, params["cluster_width"])
    return ScalingRecord(
        h=h, l2_norm=st["l2_norm"], sup_norm=st["sup_norm"],
        residual_l2=st["residual_l2"],
        extra={"cluster_dim": st["cluster_dim"],
               "origin_value": st["sup_norm"]})


def _shell_junk_sums(h, e_lo, e_hi, cutoff):
    """Row-by-row lattice sums over the shell e_lo <= h |k| <= e_hi.

    Returns (count, sum of (h^2|k|^2-1)^2, sum of (1 - chi(h|k|))).
    """
    lo2 = (e_lo / h) ** 2
    hi2 = (e_hi / h) ** 2
    kmax = int(math.floor(math.sqrt(hi2)))
    count = 0
    sum_sym2 = 0.0
    sum_omchi = 0.0
    for k1 in range(-kmax, kmax + 1):
        rem_hi = hi2 - k1 * k1
        if rem_hi < 0:
            continue
        rem_lo = lo2 - k1 * k1
        t = int(math.floor(math.sqrt(rem_hi)))
        if rem_lo <= 0:
            k2 = np.arange(-t, t + 1)
        else:
            s = int(math.ceil(math.sqrt(rem_lo)))
            while s * s < rem_lo:
                s += 1
            if s > t:
                continue
            k2 = np.concatenate([np.arange(-t, -s + 1), np.arange(s, t + 1)])
        r2 = k1 * k1 + k2.astype(float) ** 2
        sym = h * h * r2 - 1.0
        e = h * np.sqrt(r2)
        count += len(k2)
        sum_sym2 += float(np.sum(sym ** 2))
        sum_omchi += float(np.sum(1.0 - cutoff(e, np.zeros_like(e))))
    return count, sum_sym2, sum_omchi


def _cutoff_defect_record(h, params):
    """Torus cluster plus a coherent high-frequency component saturating
    the weak-quasimode budget; the frequency-cutoff defect is then the
    closed-form value at the origin (all phases align there).
    """
    width = 0.5  # keep half the residual budget for the high-frequency part
    modes = spectral.torus_annulus_modes(h, width)
    m = len(modes)
    if m == 0:
        raise QlabError(f"empty cluster at h={h:g}")
    energies = h ** 2 * np.sum(modes.astype(float) ** 2, axis=1) - 1.0
    rms_cluster = float(np.sqrt(np.mean(energies ** 2)))
    cutoff = radial_cutoff()
    # shell inside the cutoff's vanishing region, so 1 - chi is order one
    n_junk, sum_sym2, sum_omchi = _shell_junk_sums(h, 6.5, 7.5, cutoff)
    if n_junk == 0:
        raise QlabError(f"no shell modes at h={h:g}")
    rms_junk = math.sqrt(sum_sym2 / n_junk)
    b = 0.5 * h / rms_junk
    a = math.sqrt(1.0 - b * b)
    residual = math.sqrt(a * a * rms_cluster ** 2 + b * b * rms_junk ** 2)
    two_pi = 2.0 * math.pi
    sup = (a * math.sqrt(m) + b * math.sqrt(n_junk)) / two_pi
    defect = b * sum_omchi / (math.sqrt(n_junk) * two_pi)
    return ScalingRecord(
        h=h, l2_norm=1.0, sup_norm=sup, residual_l2=residual,
        extra={"cluster_dim": m, "origin_value": sup,
               "cutoff_defect": defect, "junk_modes": n_junk,
               "junk_amplitude": b})


def _harmonic_record(h, params):
    n = params.get("grid_points") or 256
    grid = Grid2D(3.0, n)
    P = assemble(h, MetricField.identity(), PotentialField.harmonic(shift=2 * h),
                 grid, backend="fd")
    pairs = spectral.interior_eigenpairs(
        P, width_constant=params["cluster_width"], max_count=4,
        seed=params["seed"])
    if len(pairs) != 1:
        raise QlabError(f"expected a single ground pair, found {len(pairs)}")
    e0, w = pairs[0]
    sup = sup_norm(w)
    c = grid.points_per_dim // 2
    return ScalingRecord(
        h=h, l2_norm=1.0, sup_norm=sup, residual_l2=abs(e0),
        extra={"eigenvalue_offset": e0, "cluster_dim": 1,
               "origin_value": float(np.abs(w.values[c, c])),
               "sup_scaled": sup * math.sqrt(math.pi * h)})


def _hyperbolic_record(h, params):
    s = ce.build_sum(h)
    rep = s.report()
    restricted = ce.verify_restricted_sum(h)
    return ScalingRecord(
        h=h, l2_norm=rep["l2_norm"], sup_norm=rep["sup_norm"],
        residual_l2=rep["residual_hyperbolic"],
        extra={
            "origin_value": rep["value_at_origin"],
            "piece_count": rep["piece_count"],
            "x1x2_norm": rep["x1x2_norm"],
            "x1sq_norm_full": rep["x1sq_norm"],
            "form_residual_max": rep["form_residual_max"],
            "orthogonality_max": rep["orthogonality_max"],
            "restricted_piece_count": restricted["piece_count"],
            "restricted_x1sq_norm": restricted["x1sq_norm"],
            "restricted_origin_value": restricted["value_at_origin"],
        })


def _variable_potential_record(h, params, potential, label):
    rec_n = recommended_fd_points(math.pi, h)
    n = params.get("grid_points") or min(512, rec_n)
    grid = Grid2D(math.pi, n)
    P = assemble(h, MetricField.identity(), potential, grid, backend="fd")
    cluster, u, resid = _coherent_window_cluster(
        P, h, params["cluster_width"], params.get("max_count", 80),
        params["seed"])
    return ScalingRecord(
        h=h, l2_norm=1.0, sup_norm=sup_norm(u), residual_l2=resid,
        extra={"cluster_dim": len(cluster.eigenvalues),
               "origin_value": float(np.abs(
                   u.values[grid.points_per_dim // 2, grid.points_per_dim // 2])),
               "resolution_ok": n >= rec_n,
               "grid_points": n})


def _zero_crossing_record(h, params):
    # V(0) = 0, |dV(0)| = 1, smooth periodic; the zero set is a curve
    # through the origin.
    pot = PotentialField(
        lambda x1, x2: np.sin(x1) + 0.05 * (1.0 - np.cos(x2)),
        grad=lambda x1, x2: (np.cos(x1), 0.05 * np.sin(x2)),
        hess=lambda x1, x2: (-np.sin(x1), np.zeros_like(np.asarray(x1, float)),
                             0.05 * np.cos(x2)),
        name="zero-crossing")
    return _variable_potential_record(h, params, pot, "zero-crossing")


def _elliptic_record(h, params):
    # 0.7 <= |V| <= 1.3 on the whole box.
    pot = PotentialField(
        lambda x1, x2: -1.0 + 0.3 * np.cos(x1) * np.cos(x2),
        grad=lambda x1, x2: (-0.3 * np.sin(x1) * np.cos(x2),
                             -0.3 * np.cos(x1) * np.sin(x2)),
        hess=lambda x1, x2: (-0.3 * np.cos(x1) * np.cos(x2),
                             0.3 * np.sin(x1) * np.sin(x2),
                             -0.3 * np.cos(x1) * np.cos(x2)),
        name="elliptic")
    return _variable_potential_record(h, params, pot, "elliptic")


# name -> (builder, default certificate constant, default k range)
EXPERIMENTS = {
    "torus-cluster": (_torus_cluster_record, 1.0, (4, 12)),
    "cutoff-defect": (_cutoff_defect_record, 1.0, (4, 10)),
    "harmonic-ground": (_harmonic_record, 1.0, (3, 5)),
    "hyperbolic-counterexample": (_hyperbolic_record, 4.43, (6, 16)),
    "zero-crossing": (_zero_crossing_record, 1.0, (3, 4)),
    "elliptic": (_elliptic_record, 1.0, (3, 4)),
}


def run_sweep(experiment: str, h_values, cluster_width: float = 1.0,
              grid_points: int | None = None, seed: int = 0,
              workers: int | None = None,
              certificate_constant: float | None = None) -> ScalingReport:
    """Run one experiment over strictly decreasing h values.

    Builder failures at individual h values are recorded as failed
    records (partial report); uncertified records are excluded from fits.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; "
                         f"choose from {sorted(EXPERIMENTS)}")
    h_values = [float(h) for h in h_values]
    if any(h > 0.25 for h in h_values):
        raise ValueError("all h values must be <= 1/4")
    if any(later >= earlier for earlier, later in zip(h_values, h_values[1:])):
        raise ValueError("h values must be strictly decreasing")
    builder, default_cert, _ = EXPERIMENTS[experiment]
    cert = certificate_constant if certificate_constant is not None else default_cert
    params = {"cluster_width": cluster_width, "grid_points": grid_points,
              "seed": seed}
    if os.environ.get("QLAB_DETERMINISTIC") == "1":
        workers = 1
    workers = workers or 1

    def one(h):
        try:
            return builder(h, params)
        except Exception as exc:  # noqa: BLE001 - reported in the record
            return ScalingRecord(h=h, l2_norm=math.nan, sup_norm=math.nan,
                                 residual_l2=math.nan, certified=False,
                                 failure=f"{type(exc).__name__}: {exc}")

    if workers == 1:
        records = [one(h) for h in h_values]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, h_values))
    records.sort(key=lambda r: -r.h)

    notes = []
    for r in records:
        if r.failure is not None:
            notes.append(f"h={r.h:g}: builder failed: {r.failure}")
            continue
        r.certified = r.residual_l2 <= cert * r.h * (1 + 1e-9)
        if not r.certified:
            notes.append(
                f"h={r.h:g}: residual {r.residual_l2:g} exceeds "
                f"{cert:g} * h; excluded from fits")

    report = ScalingReport(experiment=experiment, records=records,
                           certificate_constant=cert, notes=notes)
    good = report.certified_records()
    if len(good) >= 5:
        report.exponent, report.exponent_stderr = fit_exponent(good)
        (report.log_factor_slope, report.log_factor_stderr,
         report.log_factor_tstat, report.log_factor_pvalue) = _log_factor_full(good)
        if report.log_factor_slope > 0 and report.log_factor_pvalue < 0.01:
            report.verdict = "log-corrected"
        elif abs(report.log_factor_tstat) < 2.0:
            report.verdict = "pure-power"
        else:
            report.verdict = "ambiguous"
    else:
        report.notes.append(
            f"only {len(good)} certified records; fits need >= 5")
    return report


def dyadic_h_values(k_min: int, k_max: int):
    """h = 2^-k for k = k_min..k_max (strictly decreasing)."""
    if k_max < k_min:
        raise ValueError("k range must satisfy k_min <= k_max")
    return [2.0 ** (-k) for k in range(k_min, k_max + 1)]
