"""Command-line entry point.

Subcommands:
  run    <config.json>            single run + monitors + output bundle
  sweep  <config.json>            Cartesian-product parameter sweep
  verify [--level quick|full]     oracle and identity regression suites
  report <bundle-dir>             plot-ready extracts + text summary

Exit codes: 0 success (converged or horizon reached, all monitors pass),
2 monitor violation, 3 singularity, 4 config error.
"""

from __future__ import annotations

import argparse
import copy
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _kernels, flow, monitors, oracle
from .geometry import compute_fields
from .scaling import s_of_t
from .weight import WeightSpec, weight_from_config

EXIT_OK = 0
EXIT_MONITOR = 2
EXIT_SINGULARITY = 3
EXIT_CONFIG = 4

_TOP_KEYS = {"n", "theta_max", "cells", "weight", "initial", "solver",
             "output", "monitors", "sweep"}
_WEIGHT_KEYS = {"kind", "alpha", "c1", "c2", "c3", "c4", "c5", "c6", "table"}
_INITIAL_KEYS = {"kind", "r0", "eps", "phi"}
_SOLVER_KEYS = {"cfl", "t_max", "s_max", "denom_floor", "conv_tol",
                "rescale_c", "cadence_t"}
_OUTPUT_KEYS = {"dir", "cadence_s", "snapshot_every"}
_MONITOR_KEYS = {"tolerances", "fatal"}


class ConfigError(ValueError):
    pass


def _reject_unknown(mapping, allowed, where):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def parse_config(doc: dict):
    """Validate the JSON document and build a FlowConfig plus output options."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(doc, _TOP_KEYS, "config root")
    for key in ("n", "theta_max", "cells", "weight", "initial"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")
    _reject_unknown(doc["weight"], _WEIGHT_KEYS, "weight")
    _reject_unknown(doc["initial"], _INITIAL_KEYS, "initial")
    solver = doc.get("solver", {})
    _reject_unknown(solver, _SOLVER_KEYS, "solver")
    output = doc.get("output", {})
    _reject_unknown(output, _OUTPUT_KEYS, "output")
    mon = doc.get("monitors", {})
    _reject_unknown(mon, _MONITOR_KEYS, "monitors")
    if solver.get("t_max") is None and solver.get("s_max") is None:
        raise ConfigError("solver must set t_max, s_max, or both")

    try:
        weight = weight_from_config(doc["weight"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        config = flow.FlowConfig(
            n=int(doc["n"]), theta_max=float(doc["theta_max"]),
            cells=int(doc["cells"]), weight=weight, initial=doc["initial"],
            cfl=float(solver.get("cfl", 0.25)),
            t_max=solver.get("t_max"), s_max=solver.get("s_max"),
            denom_floor=float(solver.get("denom_floor", 1e-6)),
            conv_tol=float(solver.get("conv_tol", 1e-6)),
            rescale_c=solver.get("rescale_c", "midpoint"),
            cadence_s=float(output.get("cadence_s", 0.05)),
            cadence_t=solver.get("cadence_t"),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    out_opts = {
        "dir": output.get("dir", "out"),
        "snapshot_every": int(output.get("snapshot_every", 1)),
        "tolerances": mon.get("tolerances", {}),
        "fatal": list(mon.get("fatal", [])),
    }
    return config, out_opts


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_bundle(out_dir: Path, traj, report, doc: dict):
    """Write series.csv, snapshots/NNNN.csv, summary.json, config echo."""
    out_dir.mkdir(parents=True, exist_ok=True)
    snap_dir = out_dir / "snapshots"
    snap_dir.mkdir(exist_ok=True)

    cols = flow.SERIES_COLUMNS
    with open(out_dir / "series.csv", "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in zip(*(traj.series[c] for c in cols)):
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    every = doc.get("output", {}).get("snapshot_every", 1)
    bounds = {"t": [], "s": [], "phibar_lo": [], "phibar_hi": [],
              "min_phi": [], "max_phi": []}
    for i, snap in enumerate(traj.snapshots):
        theta_t = math.exp(traj.sol_c.phibar_at(snap.t))
        bounds["t"].append(snap.t)
        bounds["s"].append(s_of_t(traj.sol_c, snap.t))
        bounds["phibar_lo"].append(traj.sol_lo.phibar_at(snap.t))
        bounds["phibar_hi"].append(traj.sol_hi.phibar_at(snap.t))
        bounds["min_phi"].append(float(np.min(snap.phi)))
        bounds["max_phi"].append(float(np.max(snap.phi)))
        if i % max(every, 1) != 0 and i != len(traj.snapshots) - 1:
            continue
        f = compute_fields(traj.grid, traj.weight, snap.phi)
        with open(snap_dir / f"{i:04d}.csv", "w") as fh:
            fh.write("theta,phi,u,u_tilde,v,H,denom,w,Psi\n")
            for j in range(traj.grid.cells):
                fh.write(",".join(_fmt(v) for v in (
                    traj.grid.theta[j], snap.phi[j], f.u[j],
                    f.u[j] / theta_t, f.v[j], f.H[j], f.denom[j],
                    f.w[j], f.Psi[j])) + "\n")

    summary = {
        "status": traj.status,
        "backend": traj.backend,
        "total_steps": traj.total_steps,
        "t_final": traj.snapshots[-1].t,
        "s_final": s_of_t(traj.sol_c, traj.snapshots[-1].t),
        "monitor_report": report.as_dict(),
        "bounds_curves": bounds,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    with open(out_dir / "config.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def _execute(doc: dict, out_dir: Path):
    """Run + monitor + write; returns (exit_code, traj, report)."""
    config, opts = parse_config(doc)
    try:
        traj = flow.run(config)
    except (flow.InitialProfileError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None, None

    report = monitors.convergence_report(traj, tols=opts["tolerances"])
    if opts["fatal"]:
        failed_fatal = [c.name for c in report.checks
                        if not c.passed and c.name in opts["fatal"]]
        if failed_fatal:
            traj.status = "monitor_abort"
    write_bundle(out_dir, traj, report, doc)

    if traj.status == "singularity":
        print("flow hit a singularity (mean convexity lost)", file=sys.stderr)
        return EXIT_SINGULARITY, traj, report
    if not report.all_pass or traj.status == "monitor_abort":
        for c in report.checks:
            if not c.passed:
                print(f"monitor violation: {c.name} "
                      f"(worst {c.worst_violation:.3e} > tol {c.tolerance:.3e})",
                      file=sys.stderr)
        return EXIT_MONITOR, traj, report
    return EXIT_OK, traj, report


def cmd_run(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
        config, opts = parse_config(doc)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, traj, report = _execute(doc, Path(opts["dir"]))
    if traj is not None:
        print(f"status={traj.status} steps={traj.total_steps} "
              f"backend={traj.backend} r_inf={report.r_inf_estimate:.8g} "
              f"all_pass={report.all_pass}")
    return code


def _set_dotted(doc: dict, dotted: str, value):
    parts = dotted.split(".")
    node = doc
    for p in parts[:-1]:
        node = node[p]
    node[parts[-1]] = value


def cmd_sweep(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
        axes = doc.get("sweep")
        if not axes:
            raise ConfigError("sweep config must contain a 'sweep' object")
        base = {k: v for k, v in doc.items() if k != "sweep"}
        parse_config(base)  # validate the base document early
    except (OSError, json.JSONDecodeError, ConfigError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    keys = sorted(axes)
    root = Path(base.get("output", {}).get("dir", "sweep_out"))
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    all_ok = True
    for i, combo in enumerate(itertools.product(*(axes[k] for k in keys))):
        sub = copy.deepcopy(base)
        for k, v in zip(keys, combo):
            _set_dotted(sub, k, v)
        run_dir = root / f"run_{i:03d}"
        sub.setdefault("output", {})["dir"] = str(run_dir)
        row = {k: combo[j] for j, k in enumerate(keys)}
        try:
            parse_config(sub)
            code, traj, report = _execute(sub, run_dir)
        except ConfigError as exc:
            code, traj, report = EXIT_CONFIG, None, None
            print(f"run_{i:03d} config error: {exc}", file=sys.stderr)
        if traj is None:
            row.update(status="config_rejected", r_inf="",
                       worst_violation="", exit_code=code)
        else:
            worst = max((c.worst_violation for c in report.checks),
                        default=0.0)
            row.update(status=traj.status,
                       r_inf=report.r_inf_estimate,
                       worst_violation=worst, exit_code=code)
        all_ok = all_ok and code == EXIT_OK
        rows.append(row)

    agg_cols = keys + ["status", "r_inf", "worst_violation", "exit_code"]
    with open(root / "aggregate.csv", "w") as fh:
        fh.write(",".join(agg_cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in agg_cols) + "\n")
    print(f"sweep: {len(rows)} runs, all_ok={all_ok}, results in {root}")
    return EXIT_OK if all_ok else EXIT_MONITOR


# ---------------------------------------------------------------------------
# verify suites

def _verify_sphere_regression(checks):
    import time
    from .grid import build_grid
    for alpha in (0.0, 1.0, 2.0):
        w = WeightSpec(kind="power", alpha=alpha, c1=max(alpha, 1e-12),
                       c2=max(alpha, 1e-12)) if alpha > 0 else \
            WeightSpec(kind="power", alpha=0.0)
        cfg = flow.FlowConfig(
            n=2, theta_max=math.pi / 3, cells=128, weight=w,
            initial={"kind": "constant", "r0": 1.0}, cfl=0.25, t_max=1.0,
            conv_tol=0.0, cadence_t=0.25)
        t0 = time.perf_counter()
        traj = flow.run(cfg)
        elapsed = time.perf_counter() - t0
        u_exact = oracle.sphere_solution(w, 1.0, 2, traj.snapshots[-1].t)
        err = float(np.max(np.abs(np.exp(traj.snapshots[-1].phi) / u_exact - 1.0)))
        checks.append((f"sphere_regression_alpha{alpha:g}", err <= 1e-6,
                       f"rel_err={err:.2e} time={elapsed:.2f}s"))


def _verify_oracle_equivalence(checks, resolutions=(128,)):
    from .grid import build_grid
    w = WeightSpec(kind="power", alpha=1.0, c1=1.0, c2=1.0)
    errs = []
    for cells in resolutions:
        grid = build_grid(2, math.pi / 3, cells)
        phi = 0.05 * np.cos(math.pi * grid.theta / grid.theta_max)
        h_graph = compute_fields(grid, w, phi).H
        h_emb = oracle.embedding_mean_curvature(grid, phi, aux_points=4096)
        errs.append(float(np.max(np.abs(h_graph / h_emb - 1.0))))
    # the J=128 case is the quantitative target; coarser grids feed the order
    target = errs[1] if len(errs) > 1 else errs[0]
    checks.append(("oracle_H_equivalence", target <= 1e-4,
                   f"max_rel_dev={errs}"))
    if len(errs) == 3:
        est = oracle.convergence_order(errs)
        checks.append(("oracle_H_order", est.passed, f"orders={est.orders}"))


def _verify_psi_decay(checks):
    res = []
    for cells, cad in ((64, 0.02), (128, 0.01)):
        w = WeightSpec(kind="power", alpha=1.0, c1=1.0, c2=1.0)
        cfg = flow.FlowConfig(
            n=2, theta_max=math.pi / 3, cells=cells, weight=w,
            initial={"kind": "cosine", "r0": 1.0, "eps": 0.05},
            cfl=0.25, t_max=0.2, conv_tol=0.0, cadence_t=cad)
        traj = flow.run(cfg)
        res.append(monitors.check_psi_identity(traj, len(traj.snapshots) // 2))
    order = math.log2(res[0] / res[1])
    checks.append(("psi_identity_decay", order >= 1.8,
                   f"residuals={res} order={order:.2f}"))


def cmd_verify(args) -> int:
    checks = []
    _verify_sphere_regression(checks)
    _verify_oracle_equivalence(
        checks, resolutions=(64, 128, 256) if args.level == "full" else (128,))
    if args.level == "full":
        _verify_psi_decay(checks)
    width = max(len(name) for name, _, _ in checks)
    ok = True
    for name, passed, note in checks:
        ok = ok and passed
        print(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}  {note}")
    return EXIT_OK if ok else EXIT_MONITOR


def cmd_report(args) -> int:
    bundle = Path(args.bundle)
    try:
        summary = json.loads((bundle / "summary.json").read_text())
        series_text = (bundle / "series.csv").read_text().strip().splitlines()
    except (OSError, json.JSONDecodeError) as exc:
        print(f"missing or corrupt bundle: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rep_dir = bundle / "report"
    rep_dir.mkdir(exist_ok=True)

    header = series_text[0].split(",")
    rows = [line.split(",") for line in series_text[1:]]
    idx = {c: i for i, c in enumerate(header)}
    with open(rep_dir / "diagnostics.csv", "w") as fh:
        fh.write("s,osc_u_tilde,sup_grad,min_denom,star_ratio\n")
        for r in rows:
            fh.write(",".join(r[idx[c]] for c in
                              ("s", "osc_u_tilde", "sup_grad", "min_denom",
                               "star_ratio")) + "\n")

    bc = summary["bounds_curves"]
    with open(rep_dir / "bounds.csv", "w") as fh:
        fh.write("t,s,phibar_lo,min_phi,max_phi,phibar_hi\n")
        for vals in zip(bc["t"], bc["s"], bc["phibar_lo"], bc["min_phi"],
                        bc["max_phi"], bc["phibar_hi"]):
            fh.write(",".join(_fmt(v) for v in vals) + "\n")

    snaps = sorted((bundle / "snapshots").glob("*.csv"))
    if snaps:
        profiles = {}
        theta_col = None
        for p in snaps:
            lines = p.read_text().strip().splitlines()
            cols = lines[0].split(",")
            i_th, i_ut = cols.index("theta"), cols.index("u_tilde")
            data = [ln.split(",") for ln in lines[1:]]
            if theta_col is None:
                theta_col = [d[i_th] for d in data]
            profiles[p.stem] = [d[i_ut] for d in data]
        with open(rep_dir / "profiles.csv", "w") as fh:
            names = sorted(profiles)
            fh.write("theta," + ",".join(f"u_tilde_{n}" for n in names) + "\n")
            for j, th in enumerate(theta_col):
                fh.write(th + "," + ",".join(profiles[n][j] for n in names) + "\n")

    status = summary["status"]
    rep = summary["monitor_report"]
    lines = [f"status: {status}"]
    if status in ("singularity", "monitor_abort"):
        lines.append("NOTE: series truncated before the configured horizon")
    lines.append(f"t_final: {summary['t_final']}, s_final: {summary['s_final']}")
    lines.append(f"r_inf estimate: {rep['r_inf_estimate']} "
                 f"in bounds {rep['r_inf_bounds']}")
    for c in rep["checks"]:
        lines.append(f"  {c['name']:<20} {'PASS' if c['passed'] else 'FAIL'} "
                     f"worst={c['worst_violation']:.3e} tol={c['tolerance']:.3e}")
    (rep_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coneflow",
        description="Weighted inverse mean curvature flow in a convex cone: "
                    "solver and estimate-verification harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one flow run from a config")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="Cartesian-product parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="oracle/identity suites")
    p_verify.add_argument("--level", choices=("quick", "full"), default="quick")
    p_verify.set_defaults(func=cmd_verify)

    p_report = sub.add_parser("report", help="plot extracts from a bundle")
    p_report.add_argument("bundle")
    p_report.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
