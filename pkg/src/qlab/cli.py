"""Command-line surface: experiment dispatch and report emission.

Subcommands:

    qlab sweep          --experiment NAME --k MIN..MAX [...]
    qlab classify       --potential NAME|poly:SPEC [--h-exp K] [...]
    qlab counterexample --k MIN..MAX [...]
    qlab cluster        --h-exp K [...]
    qlab verify         --potential NAME|poly:SPEC

Exit codes: 0 success, 1 usage or internal error, 2 scientific
certificate failure (quasimode residual or normalization condition).
Every JSON report embeds the resolved configuration verbatim and
re-serializes byte-identically.  QLAB_DETERMINISTIC=1 forces a single
worker and fixed summation order.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import __version__
from . import counterexample as ce
from . import rescale, spectral, svgplot
from .errors import QlabError
from .field import BUILTIN_POTENTIALS, MetricField, PotentialField
from .sweep import EXPERIMENTS, dyadic_h_values, run_sweep

CSV_HEADER = "h,l2_norm,sup_norm,residual_l2,origin_value,cluster_dim"


@dataclass
class RunConfig:
    """Resolved run configuration; embedded verbatim in every report."""

    command: str
    experiment: str | None = None
    k_min: int | None = None
    k_max: int | None = None
    grid: int | None = None
    cluster_width: float = 1.0
    out: str = "qlab-out"
    seed: int = 0
    workers: int | None = None
    potential: str | None = None
    h_exp: int | None = None
    cover_grid: int = 400
    backend: str = "fd"

    def to_dict(self) -> dict:
        return asdict(self)


def _sanitize(obj):
    """Make reports json-serializable (numpy scalars -> python)."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def write_json(path: Path, payload: dict):
    text = json.dumps(_sanitize(payload), indent=2, sort_keys=True) + "\n"
    path.write_text(text)


def _parse_k_range(spec: str):
    try:
        lo, hi = spec.split("..")
        return int(lo), int(hi)
    except ValueError as exc:
        raise ValueError(f"bad k range {spec!r}; expected MIN..MAX") from exc


def _parse_potential(spec: str) -> PotentialField:
    if spec in BUILTIN_POTENTIALS:
        return BUILTIN_POTENTIALS[spec]()
    if spec.startswith("poly:"):
        coeffs = {}
        for term in spec[len("poly:"):].split(";"):
            powers, c = term.split("=")
            p1, p2 = powers.split(",")
            coeffs[(int(p1), int(p2))] = float(c)
        return PotentialField.from_polynomial(coeffs, name=spec)
    raise ValueError(
        f"unknown potential {spec!r}; use one of {sorted(BUILTIN_POTENTIALS)} "
        f"or poly:P1,P2=C[;P1,P2=C...]")


def _load_config_file(path: str) -> dict:
    """Flat key = value pairs; '#' starts a comment."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _records_csv(records) -> str:
    lines = [CSV_HEADER]
    for r in records:
        extra = r.extra
        cells = [repr(r.h)]
        for v in (r.l2_norm, r.sup_norm, r.residual_l2):
            cells.append("" if (v is None or (isinstance(v, float) and math.isnan(v))) else repr(v))
        ov = extra.get("origin_value")
        cells.append("" if ov is None else repr(float(ov)))
        cd = extra.get("cluster_dim")
        cells.append("" if cd is None else str(int(cd)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.experiment not in EXPERIMENTS:
        print(f"error: unknown experiment {cfg.experiment!r}; choose from "
              f"{', '.join(sorted(EXPERIMENTS))}", file=sys.stderr)
        return 1
    k_lo, k_hi = cfg.k_min, cfg.k_max
    if k_lo is None:
        k_lo, k_hi = EXPERIMENTS[cfg.experiment][2]
    report = run_sweep(cfg.experiment, dyadic_h_values(k_lo, k_hi),
                       cluster_width=cfg.cluster_width, grid_points=cfg.grid,
                       seed=cfg.seed, workers=cfg.workers)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"config": cfg.to_dict(), "version": __version__}
    payload.update(report.to_dict())
    write_json(out / "report.json", payload)
    (out / "records.csv").write_text(_records_csv(report.records))
    good = report.certified_records()
    if good:
        fit = None
        if report.exponent is not None:
            # intercept in log10 space through the mean point
            xs = np.log10([r.h for r in good])
            ys = np.log10([r.sup_norm for r in good])
            fit = (report.exponent, float(np.mean(ys) - report.exponent * np.mean(xs)))
        svg = svgplot.scaling_plot_svg(
            [(r.h, r.sup_norm) for r in good], fit=fit,
            title=f"{cfg.experiment}: sup norm vs h", xlabel="h",
            ylabel="sup norm")
        (out / "scaling.svg").write_text(svg)
    bad = [r for r in report.records if not r.certified or r.failure]
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    print(f"sweep {cfg.experiment}: {len(report.records)} records, "
          f"verdict {report.verdict}; wrote {out}/report.json")
    return 2 if bad else 0


def cmd_classify(cfg: RunConfig) -> int:
    potential = _parse_potential(cfg.potential or "zero")
    metric = MetricField.identity()
    h = 2.0 ** (-(cfg.h_exp if cfg.h_exp is not None else 10))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    report = rescale.verify_normalization(metric, potential)
    if not report.passed():
        write_json(out / "normalization.json",
                   {"config": cfg.to_dict(), "normalization": report.to_dict()})
        print(f"normalization failed: cond2 values {report.cond2_values}, "
              f"suggested_c = {report.suggested_c}; wrote "
              f"{out}/normalization.json", file=sys.stderr)
        return 2
    decisions = rescale.cover_ball(potential, h, sample_points=cfg.cover_grid)
    covered = rescale.verify_cover(decisions, sample_points=cfg.cover_grid)
    counts = {}
    for d in decisions:
        counts[d.case_id] = counts.get(d.case_id, 0) + 1
    write_json(out / "cover.json", {
        "config": cfg.to_dict(),
        "h": h,
        "normalization": report.to_dict(),
        "ball_count": len(decisions),
        "case_counts": {str(k): v for k, v in sorted(counts.items())},
        "fully_covered": covered,
        "decisions": [d.to_dict() for d in decisions],
    })
    (out / "cover.svg").write_text(svgplot.cover_plot_svg(
        decisions, title=f"cover of the unit ball: {potential.name}, h=2^-{cfg.h_exp or 10}"))
    print(f"classify {potential.name}: {len(decisions)} balls, cases {counts}, "
          f"covered={covered}; wrote {out}/cover.json")
    return 0 if covered else 2


def cmd_counterexample(cfg: RunConfig) -> int:
    k_lo, k_hi = cfg.k_min or 6, cfg.k_max or 16
    if k_lo < 2:
        print(f"error: k must be >= 2 so that h <= 1/4 and |log h| > 1 "
              f"(got k_min = {k_lo})", file=sys.stderr)
        return 1
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cert = EXPERIMENTS["hyperbolic-counterexample"][1]
    rows, failures = [], []
    for k in range(k_lo, k_hi + 1):
        h = 2.0 ** (-k)
        try:
            s = ce.build_sum(h)
            rep = s.report()
            rep["origin_formula"] = ce.expected_origin_value(h)
            rep["restricted"] = ce.verify_restricted_sum(h)
            if k <= 10:
                grid_rep = s.report_on_grid()
                rep["orthogonality_smeared_max"] = grid_rep["orthogonality_smeared_max"]
            if rep["residual_hyperbolic"] > cert * h:
                failures.append(f"k={k}: hyperbolic residual exceeds {cert} h")
        except QlabError as exc:
            rep = {"h": h, "error": str(exc)}
            failures.append(f"k={k}: {exc}")
        rows.append(rep)
    payload = {"config": cfg.to_dict(), "version": __version__,
               "certificate_constant": cert,
               "metadata": {"log_convention": "natural"},
               "records": rows, "failures": failures}
    write_json(out / "counterexample.json", payload)
    k_prof = min(k_hi, 10)
    s = ce.build_sum(2.0 ** (-k_prof))
    x1, u1 = s.axis_profile(axis=0)
    x2, u2 = s.axis_profile(axis=1)
    svg = svgplot.profile_plot_svg(
        [(x1, np.abs(u1), "|u| along x2 = 0"), (x2, np.abs(u2), "|u| along x1 = 0")],
        title=f"axis profiles at h = 2^-{k_prof}")
    (out / "profile.svg").write_text(svg)
    for f in failures:
        print(f"certificate failure: {f}", file=sys.stderr)
    print(f"counterexample k={k_lo}..{k_hi}: wrote {out}/counterexample.json")
    return 2 if failures else 0


def cmd_cluster(cfg: RunConfig) -> int:
    k = cfg.h_exp if cfg.h_exp is not None else 4
    h = 2.0 ** (-k)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stats = spectral.torus_cluster_stats(h, cfg.cluster_width)
    payload = {"config": cfg.to_dict(), "h": h, "stats": stats}
    try:
        w = spectral.coherent_torus_cluster(h, cfg.cluster_width)
        n = w.grid.points_per_dim
        from .field import l2_norm, sup_norm
        payload["grid_check"] = {
            "points_per_dim": n,
            "l2_norm": l2_norm(w),
            "sup_norm": sup_norm(w),
            "origin_times_2pi": float((w.values[n // 2, n // 2] * 2 * np.pi).real),
        }
    except QlabError as exc:
        payload["grid_check"] = {"skipped": str(exc)}
    write_json(out / "cluster.json", payload)
    print(f"cluster h=2^-{k}: {stats['cluster_dim']} modes, "
          f"sup={stats['sup_norm']:.6g}; wrote {out}/cluster.json")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    potential = _parse_potential(cfg.potential or "zero")
    metric = MetricField.identity()
    report = rescale.verify_normalization(metric, potential)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "normalization.json",
               {"config": cfg.to_dict(), "potential": potential.name,
                "normalization": report.to_dict()})
    status = "passed" if report.passed() else "failed"
    print(f"normalization {status} for {potential.name}; "
          f"wrote {out}/normalization.json")
    return 0 if report.passed() else 2


# ---------------------------------------------------------------------------
# argument handling


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qlab",
        description="numerical laboratory for sup-norm scaling of 2D "
                    "semiclassical quasimodes")
    p.add_argument("--version", action="version", version=f"qlab {__version__}")
    sub = p.add_subparsers(dest="command")
    for name in ("sweep", "classify", "counterexample", "cluster", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--experiment")
        sp.add_argument("--k", help="dyadic range MIN..MAX (h = 2^-k)")
        sp.add_argument("--grid", type=int)
        sp.add_argument("--cluster-width", type=float)
        sp.add_argument("--out")
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--potential")
        sp.add_argument("--h-exp", type=int)
        sp.add_argument("--cover-grid", type=int)
    return p


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    file_vals = _load_config_file(args.config) if args.config else {}
    converters = {
        "experiment": str, "grid": int, "cluster_width": float, "out": str,
        "workers": int, "seed": int, "potential": str, "h_exp": int,
        "cover_grid": int, "k_min": int, "k_max": int, "backend": str,
    }
    for key, val in file_vals.items():
        if key == "k":
            cfg.k_min, cfg.k_max = _parse_k_range(val)
        elif key in converters:
            setattr(cfg, key, converters[key](val))
        else:
            raise ValueError(f"unknown config key {key!r}")
    for key in ("experiment", "grid", "cluster_width", "out", "workers",
                "seed", "potential", "h_exp", "cover_grid"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "k", None):
        cfg.k_min, cfg.k_max = _parse_k_range(args.k)
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        cfg = _resolve_config(args)
        handler = {
            "sweep": cmd_sweep,
            "classify": cmd_classify,
            "counterexample": cmd_counterexample,
            "cluster": cmd_cluster,
            "verify": cmd_verify,
        }[args.command]
        return handler(cfg)
    except (ValueError, QlabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
