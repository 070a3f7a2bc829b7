"""Command-line driver: run experiments, sweep config directories, report.

Outputs per run: the resolved config, results.json (sorted keys), series.csv
and certificates.csv (RFC 4180, 17 significant digits), and SVG figures.
The output root is ./runs, overridden by SUBFP_OUT, overridden by --out.
Exit status is nonzero when any certificate fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import analysis
from .config import (ConfigError, ExperimentConfig, config_from_dict,
                     load_config, save_config)
from .discretization import build_generator, build_grid, find_splitting_constants
from .evolution import Trajectory, evolve, operator_norm_curve
from .force_field import (ForceField, canonical_gradient_field,
                          default_samples, expression_field, rotated_field,
                          verify_conditions)
from .steady_state import Density, rightmost_spectrum, solve_steady, tail_bound_check
from .util import bracket, log_dirs
from .weights import (NormSpec, Weight, critical_weight_exponent,
                      stretched_rate_limit, DecayEnvelope)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: str, header: list, rows: list) -> None:
    # RFC 4180: CRLF records, minimal quoting
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def build_field(cfg: ExperimentConfig) -> ForceField:
    if cfg.field == "canonical":
        return canonical_gradient_field(cfg.gamma, scale=cfg.scale,
                                        dim=cfg.dim, r0=cfg.r0)
    if cfg.field == "rotated":
        base = canonical_gradient_field(cfg.gamma, scale=cfg.scale,
                                        dim=2, r0=cfg.r0)
        return rotated_field(base, cfg.amplitude)
    return expression_field(cfg.gamma, list(cfg.force_exprs), dim=cfg.dim,
                            r0=cfg.r0,
                            potential=cfg.potential_expr or None)


def build_weight(cfg: ExperimentConfig) -> Weight:
    if cfg.weight_family == "polynomial":
        return Weight.polynomial(cfg.weight_k, cfg.gamma)
    if cfg.weight_family == "stretched":
        return Weight.stretched(cfg.weight_kappa, cfg.weight_s, cfg.gamma)
    return Weight.critical(cfg.weight_kappa, cfg.gamma)


def initial_state(cfg: ExperimentConfig, grid) -> np.ndarray:
    c = np.zeros(cfg.dim)
    c[0] = cfg.initial_center
    if cfg.initial == "spike":
        f = np.zeros(grid.n_cells)
        f[grid.index_of(c)] = 1.0 / grid.volumes[0]
        return f
    if cfg.initial == "gaussian":
        d2 = np.sum((grid.centers - c[None, :]) ** 2, axis=-1)
        f = np.exp(-0.5 * d2 / cfg.initial_width ** 2)
    else:
        f = bracket(grid.centers) ** (-cfg.initial_power)
    return f / np.sum(f * grid.volumes)


def output_times(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.time_spacing == "geometric":
        ts = np.geomspace(cfg.t_min, cfg.t_max, cfg.n_times)
    else:
        ts = np.linspace(cfg.t_min, cfg.t_max, cfg.n_times)
    return np.concatenate([[0.0], ts])


def _cert(name: str, value: float, threshold: float, sense: str,
          passed: bool) -> dict:
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "sense": sense, "passed": bool(passed)}


def run_experiment(cfg: ExperimentConfig, out_dir: str) -> dict:
    """Execute the configured tasks; write outputs; return the results dict."""
    os.makedirs(out_dir, exist_ok=True)
    field = build_field(cfg)
    grid = build_grid(cfg.dim, cfg.L, cfg.n)
    gen = build_generator(grid, field)
    certs: list = []
    reports: dict = {}
    series_cols: dict = {}

    samples = default_samples(cfg.dim, n=200, r_max=min(cfg.L, 100.0),
                              seed=cfg.seed)
    cond = verify_conditions(field, samples)
    reports["field_conditions"] = cond.as_dict()
    certs.append(_cert("field_conditions", cond.inf_radial_constant, 0.0,
                       ">", cond.passed))

    col_sums = np.abs(grid.volumes @ gen.matrix)
    mass_defect = float(np.max(col_sums)) / gen.norm_scale()
    certs.append(_cert("mass_conservative", mass_defect, 1e-12, "<=",
                       mass_defect <= 1e-12))

    G = solve_steady(gen)
    residual = float(np.linalg.norm(gen.matrix @ G.values)
                     / (gen.norm_scale() * np.linalg.norm(G.values)))
    reports["steady"] = {"residual": residual, "min_value": G.min_value,
                         "mass": G.mass}
    certs.append(_cert("steady_residual", residual, 1e-10, "<=",
                       residual <= 1e-10))
    certs.append(_cert("steady_positive", G.min_value, 0.0, ">",
                       G.min_value > 0.0))
    if "steady" in cfg.tasks:
        kappa_tail = 0.5 / cfg.gamma
        tail = tail_bound_check(G, kappa_tail, cfg.gamma)
        reports["tail_bound"] = tail.as_dict()
        certs.append(_cert("tail_bound", tail.ratio, 10.0, "<=", tail.passed))
        if field.potential is not None:
            V = field.potential(grid.centers)
            ref = np.exp(-(V - np.min(V)))
            ref /= np.sum(ref * grid.volumes)
            gibbs_err = float(np.max(np.abs(G.values - ref)) / np.max(ref))
            reports["steady"]["gibbs_error"] = gibbs_err
        coords = [f"x{i}" for i in range(cfg.dim)] if cfg.dim > 1 else ["x"]
        _write_csv(os.path.join(out_dir, "steady.csv"), coords + ["G"],
                   [list(grid.centers[i]) + [G.values[i]]
                    for i in range(grid.n_cells)])
        from .plots import steady_figure
        steady_figure(G, os.path.join(out_dir, "steady.svg"))

    spectrum = None
    if "spectrum" in cfg.tasks:
        spectrum = rightmost_spectrum(gen, count=cfg.spectrum_count)
        reports["spectrum"] = spectrum.as_dict()
        nz = [ev for ev in spectrum.eigenvalues
              if abs(ev) > 1e-9 * max(spectrum.scale, 1.0)]
        ok = spectrum.zero_multiplicity == 1 and all(ev.real < 0.0 for ev in nz)
        certs.append(_cert("spectrum_zero_simple", spectrum.zero_multiplicity,
                           1.0, "==", ok))
        from .plots import spectrum_figure
        spectrum_figure(spectrum, os.path.join(out_dir, "spectrum.svg"))
    gap = spectrum.gap if spectrum is not None else None

    weight = build_weight(cfg)
    norm = NormSpec(p=cfg.p, weight=weight, theta=cfg.theta)

    traj = None
    needs_traj = {"decay", "entropy", "interpolation"} & set(cfg.tasks)
    if needs_traj:
        f0 = initial_state(cfg, grid)
        times = output_times(cfg)
        traj = evolve(f0, times, gen, dt0=cfg.dt0 or None)
        series_cols["t"] = traj.times
        series_cols["mass"] = traj.masses
        series_cols["min"] = np.min(traj.snapshots, axis=1)

    if "decay" in cfg.tasks:
        series = analysis.decay_series(traj, G, norm, label=f"Lp(m^theta), p={cfg.p}")
        series_cols["distance"] = series.distances
        fit = None
        theory: dict = {}
        # heavy tails relax through a long initial layer; fit past it
        burn = 0.02 if cfg.initial == "heavy_tail" else 0.5
        window = analysis.select_fit_window(series, gap=gap, burn_fraction=burn)
        if cfg.weight_family == "polynomial":
            fit = analysis.fit_polynomial_rate(series, window=window)
            k_star = critical_weight_exponent(cfg.p, cfg.dim,
                                              cond.sup_div_constant)
            # decay transfers from L^p(m) to the smaller norm L^p(m^theta):
            # beta = k(1-theta)/(2-gamma) while theta > k*/k, saturating at
            # (k-k*)/(2-gamma) below; the full norm theta = 1 only stays
            # bounded, so no envelope is asserted there.
            k = cfg.weight_k
            if cfg.theta >= 1.0:
                beta_th = 0.0
            elif cfg.theta > k_star / k:
                beta_th = k * (1.0 - cfg.theta) / (2.0 - cfg.gamma)
            else:
                beta_th = (k - k_star) / (2.0 - cfg.gamma)
            theory = {"beta_theory": beta_th, "k_star": k_star}
            if beta_th > 0.0:
                env = DecayEnvelope.polynomial(beta_th)
                margin, C = analysis.calibrated_envelope_margin(
                    series, env, fit.window[0])
                theory["envelope_margin"] = margin
                theory["envelope_constant"] = C
                certs.append(_cert("decay_envelope", margin, 0.0, "<=",
                                   margin <= 0.0))
        else:
            sigma = cfg.sigma_fit or cfg.gamma / (2.0 - cfg.gamma)
            fit = analysis.fit_stretched_rate(series, sigma, window=window)
            if cfg.weight_family == "critical" and cfg.theta < 1.0:
                theory["lambda_limit"] = stretched_rate_limit(
                    cfg.weight_kappa, cfg.theta, cfg.gamma)
        reports["decay"] = {"fit": fit.as_dict(), "theory": theory,
                            "norm": norm.as_dict()}
        certs.append(_cert("decay_fit_quality", fit.r_squared, 0.98, ">=",
                           fit.r_squared >= 0.98))
        certs.append(_cert("decay_rate_positive", fit.exponent, 0.0, ">",
                           fit.exponent > 0.0))
        from .plots import decay_figure
        decay_figure(series, fit, os.path.join(out_dir, "decay.svg"))

    if "entropy" in cfg.tasks:
        ent = analysis.entropy_series(traj, G, "square")
        ent_abs = analysis.entropy_series(traj, G, "abs")
        reports["entropy"] = {"square": ent.as_dict(), "abs": ent_abs.as_dict()}
        series_cols["entropy_square"] = ent.values
        series_cols["entropy_abs"] = ent_abs.values
        ok = ent.nonincreasing and ent_abs.nonincreasing
        certs.append(_cert("entropy_nonincreasing",
                           max(ent.max_uptick, ent_abs.max_uptick),
                           ent.tolerance, "<=", ok))
        from .plots import entropy_figure
        entropy_figure(ent, os.path.join(out_dir, "entropy.svg"))

    if "poincare" in cfg.tasks:
        rhs_power = None if cfg.rhs_power == -10.0 else cfg.rhs_power
        poin = analysis.weak_poincare_constant(G, cfg.gamma, rhs_power=rhs_power,
                                               gen=gen)
        reports["poincare"] = poin.as_dict()
        certs.append(_cert("poincare_positive", poin.mu, 0.0, ">",
                           poin.mu > 0.0))

    if "splitting" in cfg.tasks:
        try:
            M, R, cert = find_splitting_constants(field, weight, cfg.p)
            reports["splitting"] = cert.as_dict()
            certs.append(_cert("splitting_certified", cert.max_value, 0.0,
                               "<=", cert.passed))
        except (ValueError, RuntimeError) as exc:
            reports["splitting"] = {"error": str(exc)}
            certs.append(_cert("splitting_certified", np.inf, 0.0, "<=", False))

    if "lyapunov" in cfg.tasks:
        w = weight
        pts = log_dirs(cfg.dim, n_radii=160, n_dirs=16, r_min=1e-2,
                       r_max=1e6, seed=cfg.seed)
        if cfg.absorb_M > 0.0:
            M_l, R_l = cfg.absorb_M, cfg.absorb_R
        else:
            M_l, R_l = _auto_absorption(field, w, cfg.zeta0, pts)
        lya = analysis.lyapunov_check(field, w, cfg.zeta0, M_l, R_l, pts)
        reports["lyapunov"] = lya.as_dict()
        certs.append(_cert("lyapunov_drift", lya.max_margin, 0.0, "<=",
                           lya.passed))

    if "nash" in cfg.tasks:
        quotients = []
        d2 = np.sum(grid.centers ** 2, axis=-1)
        for width in (0.5, 1.0, 2.0, 4.0):
            quotients.append(analysis.nash_quotient(
                np.exp(-0.5 * d2 / width ** 2), grid))
        reports["nash"] = {"gaussian_quotients": quotients,
                           "spread": float(np.max(quotients) / np.min(quotients))}

    if "interpolation" in cfg.tasks:
        centered = traj.snapshots - traj.masses[0] * G.values[None, :]
        ctraj = Trajectory(times=traj.times, snapshots=centered,
                           grid=grid, meta=dict(traj.meta))
        inter = analysis.interpolation_chain_check(ctraj, G, alpha=2.0,
                                                   gamma=cfg.gamma)
        reports["interpolation"] = inter.as_dict()
        certs.append(_cert("interpolation_inequality", inter.diff_max_violation,
                           0.0, "<=", inter.diff_passed))
        series_cols["e0"] = inter.e0
        series_cols["e1"] = inter.e1
        series_cols["e2"] = inter.e2

    if "ultracontractivity" in cfg.tasks:
        m0 = weight
        times = output_times(cfg)
        curve = operator_norm_curve(gen, times[times > 0.0],
                                    (1.0, _cell_weight(m0, grid)),
                                    (2.0, _cell_weight(m0, grid)))
        tpos = times[times > 0.0]
        slope, intercept, r2 = analysis._linear_fit(np.log(tpos), np.log(curve))
        reports["ultracontractivity"] = {
            "times": tpos, "norms": curve, "log_slope": slope,
            "r_squared": r2, "expected_slope": -cfg.dim / 4.0,
        }

    results = {
        "name": cfg.name,
        "config": cfg.to_dict(),
        "config_hash": cfg.hash(),
        "certificates": certs,
        "reports": reports,
        "all_passed": all(c["passed"] for c in certs),
    }

    save_config(cfg, os.path.join(out_dir, "config.toml"))
    with open(os.path.join(out_dir, "results.json"), "w", encoding="utf-8") as fh:
        json.dump(results, fh, sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")
    _write_csv(os.path.join(out_dir, "certificates.csv"),
               ["name", "value", "threshold", "sense", "passed"],
               [[c["name"], c["value"], c["threshold"], c["sense"],
                 c["passed"]] for c in certs])
    if series_cols:
        keys = list(series_cols)
        n_rows = len(next(iter(series_cols.values())))
        rows = [[series_cols[k][i] if i < len(series_cols[k]) else ""
                 for k in keys] for i in range(n_rows)]
        _write_csv(os.path.join(out_dir, "series.csv"), keys, rows)
    return results


def _cell_weight(weight: Weight, grid) -> np.ndarray:
    return weight.value(grid.centers)


def _auto_absorption(field: ForceField, w: Weight, zeta0: float,
                     pts: np.ndarray) -> tuple:
    """Smallest-effort (M, R): R past the last sign change of the unabsorbed
    margin, M just above its maximum."""
    gradV = field.grad_potential(pts)
    # w-normalized form; never evaluates w, so exp weights cannot overflow
    zeta = zeta0 * bracket(pts) ** (2.0 * (field.gamma - 1.0))
    mu = w.laplacian_over_value(pts) \
        - np.sum(gradV * w.grad_over_value(pts), axis=-1) + zeta
    r = np.linalg.norm(np.atleast_2d(pts), axis=-1)
    bad = mu > 0.0
    R = max(float(np.max(r[bad])) if np.any(bad) else 1.0, field.r0)
    M = 1.05 * max(float(np.max(mu)), 1e-12)
    return M, R


def _resolve_root(explicit: Optional[str]) -> str:
    if explicit:
        return explicit
    return os.environ.get("SUBFP_OUT", os.path.join(os.getcwd(), "runs"))


def _run_one(args: tuple) -> tuple:
    path, root = args
    try:
        cfg = load_config(path)
        res = run_experiment(cfg, os.path.join(root, cfg.name))
        return cfg.name, bool(res["all_passed"]), ""
    except Exception as exc:  # noqa: BLE001 - reported per config
        return os.path.basename(path), False, f"{type(exc).__name__}: {exc}"


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    root = _resolve_root(args.out)
    out_dir = os.path.join(root, cfg.name)
    results = run_experiment(cfg, out_dir)
    for c in results["certificates"]:
        status = "pass" if c["passed"] else "FAIL"
        print(f"[{status}] {c['name']}: {c['value']:.6g} "
              f"{c['sense']} {c['threshold']:.6g}")
    print(f"outputs in {out_dir}")
    return 0 if results["all_passed"] else 1


def cmd_sweep(args) -> int:
    root = _resolve_root(args.out)
    paths = sorted(
        os.path.join(args.dir, f) for f in os.listdir(args.dir)
        if f.endswith(".toml"))
    if not paths:
        print(f"no .toml configs under {args.dir}", file=sys.stderr)
        return 2
    jobs = [(p, root) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    ok = True
    for name, passed, err in outcomes:
        if err:
            print(f"[error] {name}: {err}")
            ok = False
        else:
            print(f"[{'pass' if passed else 'FAIL'}] {name}")
            ok = ok and passed
    return 0 if ok else 1


def _report_lines(results: dict) -> list:
    lines = [f"## {results['name']}  (config {results['config_hash']})", ""]
    lines += ["| certificate | value | threshold | status |",
              "| --- | --- | --- | --- |"]
    for c in results["certificates"]:
        status = "pass" if c["passed"] else "**FAIL**"
        lines.append(f"| {c['name']} | {c['value']:.6g} | "
                     f"{c['sense']} {c['threshold']:.6g} | {status} |")
    rep = results.get("reports", {})
    decay = rep.get("decay")
    if decay:
        fit = decay["fit"]
        lines += ["", f"fitted {fit['kind']} exponent "
                      f"{fit['exponent']:.6g} (R^2 = {fit['r_squared']:.4f}, "
                      f"window {fit['window'][0]:.3g}..{fit['window'][1]:.3g})"]
        th = decay.get("theory", {})
        if "beta_theory" in th:
            lines.append(f"theoretical envelope exponent {th['beta_theory']:.6g} "
                         f"(critical weight exponent {th['k_star']:.6g})")
        if "lambda_limit" in th:
            lines.append(f"stretched rate ceiling {th['lambda_limit']:.6g}")
    if "poincare" in rep:
        lines.append(f"weak Poincare constant {rep['poincare']['mu']:.6g}")
    if "splitting" in rep and "M" in rep.get("splitting", {}):
        sp_ = rep["splitting"]
        lines.append(f"splitting constants M = {sp_['M']:.6g}, R = {sp_['R']:.6g}, "
                     f"asymptote a* = {sp_['a_star']:.6g}")
    if "spectrum" in rep:
        lines.append(f"spectral gap {rep['spectrum']['gap']:.6g} "
                     f"(zero multiplicity {rep['spectrum']['zero_multiplicity']})")
    lines.append("")
    return lines


def cmd_report(args) -> int:
    run_dirs = []
    for entry in sorted(os.listdir(args.dir)):
        p = os.path.join(args.dir, entry, "results.json")
        if os.path.isfile(p):
            run_dirs.append(p)
    direct = os.path.join(args.dir, "results.json")
    if not run_dirs and os.path.isfile(direct):
        run_dirs = [direct]
    if not run_dirs:
        print(f"no results.json under {args.dir}", file=sys.stderr)
        return 2
    lines = ["# experiment report", ""]
    for p in run_dirs:
        with open(p, "r", encoding="utf-8") as fh:
            lines += _report_lines(json.load(fh))
    text = "\n".join(lines)
    out_path = os.path.join(args.dir, "report.md")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    print(text)
    print(f"\nreport written to {out_path}")
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="subfp",
        description="Fokker-Planck decay experiments under subcritical confinement")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output root directory")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run every config in a directory")
    p_sweep.add_argument("dir")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_rep = sub.add_parser("report", help="summarize finished runs")
    p_rep.add_argument("dir")
    p_rep.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        # validation failures name the offending key and write nothing
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
