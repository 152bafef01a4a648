"""Quantitative acceptance suite.

One test per criterion; each prints a single summary line so the pytest
-v log doubles as the acceptance report.  Tolerances are fixed here, not
imported, so a change in library defaults cannot silently weaken them.
"""

import copy
import math
import time

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from coneflow.flow import InitialProfileError, initial_profile, run
from coneflow.grid import build_grid
from coneflow.monitors import (check_area_identity, check_c0, check_gradient,
                               check_h_theta, check_phidot, check_psi_identity,
                               convergence_report)
from coneflow.geometry import compute_fields
from coneflow.oracle import (convergence_order, embedding_mean_curvature,
                             sphere_solution)
from coneflow.scaling import s_of_t, solve_scaling_ode, sphere_theta_closed_form, theta_at

from util import (THETA_MAX, cosine_config, log1p_weight, power_weight,
                  sigmoid_exp_weight, sphere_config)


def report(name, passed, detail):
    print(f"[acceptance] {name}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, detail


def test_criterion_01_sphere_regression():
    worst = 0.0
    slowest = 0.0
    for alpha in (0.0, 1.0, 2.0):
        t0 = time.perf_counter()
        traj = run(sphere_config(alpha=alpha, t_max=1.0))
        elapsed = time.perf_counter() - t0
        u = np.exp(traj.snapshots[-1].phi)
        exact = sphere_solution(power_weight(alpha), 1.0, 2, 1.0)
        worst = max(worst, float(np.max(np.abs(u / exact - 1.0))))
        slowest = max(slowest, elapsed)
    report("01 sphere regression",
           worst <= 1e-6 and slowest <= 10.0,
           f"max rel err {worst:.2e}, slowest case {slowest:.2f}s")


def test_criterion_02_scaling_ode_exactness():
    worst = 0.0
    for alpha in (0.0, 1.0, 2.0):
        sol = solve_scaling_ode(power_weight(alpha), 0.0, 2, t_max=2.0)
        for t in (0.5, 1.0, 2.0):
            exact = float(sphere_theta_closed_form(alpha, 1.0, 2, t))
            worst = max(worst, abs(theta_at(sol, t) / exact - 1.0))
    sol1 = solve_scaling_ode(power_weight(1.0), 0.0, 2, t_max=2.0)
    s_err = abs(s_of_t(sol1, 2.0) - 2.0 * math.log(2.0))
    report("02 scaling ODE exactness",
           worst <= 1e-9 and s_err <= 1e-8,
           f"Theta rel err {worst:.2e}, s(2) err {s_err:.2e}")


def test_criterion_03_oracle_equivalence():
    w = power_weight(1.0)
    phi_fn = lambda th: 0.05 * np.cos(math.pi * th / THETA_MAX)  # noqa: E731
    grid = build_grid(2, THETA_MAX, 128)
    h_graph = compute_fields(grid, w, phi_fn(grid.theta)).H
    h_emb = embedding_mean_curvature(grid, phi_fn(grid.theta), aux_points=1024)
    dev = float(np.max(np.abs(h_graph / h_emb - 1.0)))

    errs = []
    for cells in (64, 128, 256):
        g = build_grid(2, THETA_MAX, cells)
        hg = compute_fields(g, w, phi_fn(g.theta)).H
        he = embedding_mean_curvature(g, phi_fn, aux_points=4096)
        errs.append(float(np.max(np.abs(hg / he - 1.0))))
    est = convergence_order(errs, window=(1.7, 2.3))
    report("03 oracle H equivalence",
           dev <= 1e-4 and est.passed,
           f"J=128 deviation {dev:.2e}, orders {est.orders}")


def test_criterion_04_c0_sandwich(cosine_traj):
    chk = check_c0(cosine_traj, tol=1e-6)
    report("04 C0 sandwich", chk.passed,
           f"worst violation {chk.worst_violation:.2e}")


def test_criterion_05_gradient_estimate(cosine_traj):
    chk = check_gradient(cosine_traj, tol=1e-8)
    report("05 gradient estimate", chk.passed,
           f"worst violation {chk.worst_violation:.2e}, {chk.note}")


def test_criterion_06_speed_estimate(cosine_traj, sphere_traj):
    chk = check_phidot(cosine_traj, tol=1e-6)
    sphere = check_phidot(sphere_traj, tol=1e-8)
    sphere_exact = max(abs(sphere.observed_min - 0.5),
                       abs(sphere.observed_max - 0.5))
    report("06 speed estimate",
           chk.passed and sphere_exact <= 1e-8,
           f"cosine worst {chk.worst_violation:.2e}, "
           f"sphere |M - 1/n| {sphere_exact:.2e}")


def test_criterion_07_curvature_bound(cosine_traj, sphere_traj):
    chk = check_h_theta(cosine_traj, tol=1e-6)
    sphere = check_h_theta(sphere_traj, tol=1e-8)
    sphere_exact = max(abs(sphere.observed_min - 2.0),
                       abs(sphere.observed_max - 2.0))
    report("07 curvature bound",
           chk.passed and chk.observed_min > 0.0 and sphere_exact <= 1e-8,
           f"H Theta in [{chk.observed_min:.4f}, {chk.observed_max:.4f}] "
           f"vs [{chk.lower:.4f}, {chk.upper:.4f}]; "
           f"sphere |H Theta - n| {sphere_exact:.2e}")


def test_criterion_08_area_identity(area_traj):
    chk = check_area_identity(area_traj, rel_tol=1e-3, sandwich_tol=1e-6)
    report("08 area identity", chk.passed,
           f"worst rel discrepancy {chk.worst_violation:.2e}; {chk.note}")


@pytest.mark.parametrize("label,weight", [
    ("power_alpha1", None),     # None selects the default power weight
    ("log1p", log1p_weight()),
    ("sigmoid_exp", sigmoid_exp_weight()),
])
def test_criterion_09_convergence(label, weight, cosine_traj):
    t0 = time.perf_counter()
    traj = cosine_traj if weight is None else run(cosine_config(weight=weight))
    elapsed = time.perf_counter() - t0
    s_final = s_of_t(traj.sol_c, traj.snapshots[-1].t)
    osc = traj.series["osc_u_tilde"][-1]
    rep = convergence_report(traj)
    r_chk = [c for c in rep.checks if c.name == "r_inf_bounds"]
    in_bounds = bool(r_chk) and r_chk[0].worst_violation <= 1e-3
    report(f"09 convergence [{label}]",
           traj.status == "converged" and s_final <= 10.0
           and osc <= 1e-4 and in_bounds and elapsed <= 120.0,
           f"s_final {s_final:.2f}, osc {osc:.1e}, "
           f"r_inf {rep.r_inf_estimate:.6f} in {rep.r_inf_bounds}, "
           f"{elapsed:.1f}s")


def test_criterion_10_psi_identity():
    sphere = run(sphere_config(alpha=1.0, t_max=1e-3, cadence_t=2e-4))
    res_sphere = check_psi_identity(sphere, 2)

    res = []
    for cells, cad in ((64, 0.02), (128, 0.01)):
        traj = run(cosine_config(cells=cells, s_max=None, t_max=0.2,
                                 conv_tol=0.0, cadence_t=cad))
        res.append(check_psi_identity(traj, len(traj.snapshots) // 2))
    order = math.log2(res[0] / res[1])
    report("10 Psi identity",
           res_sphere <= 1e-8 and order >= 1.8,
           f"sphere residual {res_sphere:.2e}, cosine decay order {order:.2f}")


def test_criterion_11_solver_order():
    profiles = {}
    for cells in (64, 128, 256, 512):
        traj = run(cosine_config(cells=cells, s_max=None, t_max=0.5,
                                 conv_tol=0.0, cadence_t=0.5))
        grid = traj.grid
        profiles[cells] = (grid.theta, np.exp(traj.snapshots[-1].phi))
    # pairwise Richardson differences: e_J ~ C dtheta_J^2 (1 - 1/4)
    errs = []
    for coarse, fine in ((64, 128), (128, 256), (256, 512)):
        th_c, u_c = profiles[coarse]
        th_f, u_f = profiles[fine]
        errs.append(float(np.max(np.abs(u_c - CubicSpline(th_f, u_f)(th_c)))))
    est = convergence_order(errs, window=(1.7, 2.3))
    report("11 solver order", est.passed,
           f"errors {['%.2e' % e for e in errs]}, orders {est.orders}")


def test_criterion_12_negative_controls(cosine_traj):
    grid = cosine_traj.grid
    mid = len(cosine_traj.snapshots) // 2

    def corrupt(idx, delta):
        bad = copy.copy(cosine_traj)
        bad.snapshots = [copy.copy(s) for s in cosine_traj.snapshots]
        bad.snapshots[idx].phi = cosine_traj.snapshots[idx].phi + delta
        if hasattr(bad, "_monitor_fields"):
            del bad._monitor_fields
        return bad

    env = np.sin(np.pi * grid.theta / grid.theta_max)
    cases = {
        "c0_sandwich": (len(cosine_traj.snapshots) - 1, 0.02),
        "gradient_estimate": (
            mid, 3e-5 * np.sin(2.0 * math.pi * grid.theta / grid.theta_max)),
        "phidot_estimate": (
            mid, 1e-5 * env * (-1.0) ** np.arange(grid.cells)),
    }
    checks = {"c0_sandwich": check_c0, "gradient_estimate": check_gradient,
              "phidot_estimate": check_phidot, "h_theta_bound": check_h_theta}
    isolated = True
    for target, (idx, delta) in cases.items():
        bad = corrupt(idx, delta)
        results = {name: fn(bad).passed for name, fn in checks.items()}
        isolated = isolated and not results[target] and all(
            v for k, v in results.items() if k != target)

    try:
        initial_profile(grid, {"kind": "cosine", "r0": 1.0, "eps": 5.0})
        eps_rejected = False
    except InitialProfileError:
        eps_rejected = True
    try:
        build_grid(2, 2.0, 64)
        cone_rejected = False
    except ValueError:
        cone_rejected = True

    report("12 negative controls",
           isolated and eps_rejected and cone_rejected,
           f"targeted-monitor isolation {isolated}, eps=5 rejected "
           f"{eps_rejected}, theta_max>pi/2 rejected {cone_rejected}")
