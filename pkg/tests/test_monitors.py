import copy
import math

import numpy as np
import pytest

from coneflow.flow import run
from coneflow.monitors import (check_area_identity, check_c0, check_gradient,
                               check_h_theta, check_phidot, check_psi_identity,
                               convergence_report, r_inf_bounds_from_initial)

from util import cosine_config, power_weight, sphere_config


def alternating_noise(grid, delta=1e-5):
    """Node-alternating perturbation under a smooth envelope.

    Alternating signs are invisible to the centered first derivative
    (the envelope contributes only its own slope there) but inflate the
    second derivative by ~4 delta / dtheta^2, so only the phi_dot bound
    trips.  The envelope vanishes at both ends to leave the boundary
    stencils alone.
    """
    env = np.sin(np.pi * grid.theta / grid.theta_max)
    return delta * env * (-1.0) ** np.arange(grid.cells)


def corrupted(traj, snap_index, delta):
    """Deep-ish copy of a trajectory with one snapshot's phi perturbed."""
    out = copy.copy(traj)
    out.snapshots = [copy.copy(s) for s in traj.snapshots]
    out.snapshots[snap_index].phi = traj.snapshots[snap_index].phi + delta
    if hasattr(out, "_monitor_fields"):
        del out._monitor_fields
    return out


class TestC0:
    def test_cosine_run(self, cosine_traj):
        chk = check_c0(cosine_traj)
        assert chk.passed
        assert chk.worst_violation <= 1e-6

    def test_sphere_equality_case(self, sphere_traj):
        # constant data: phi(t) tracks phibar exactly (RK4 vs DOP853 error)
        chk = check_c0(sphere_traj)
        assert chk.passed
        assert abs(chk.worst_violation) <= 1e-8

    def test_negative_control_bump(self, cosine_traj):
        bad = corrupted(cosine_traj, len(cosine_traj.snapshots) - 1, 1.0)
        assert not check_c0(bad).passed


class TestGradient:
    def test_cosine_run(self, cosine_traj):
        chk = check_gradient(cosine_traj)
        assert chk.passed

    def test_sphere_both_sides_zero(self, sphere_traj):
        chk = check_gradient(sphere_traj)
        assert chk.passed
        assert chk.observed_max <= 1e-12

    def test_negative_control_noise(self, cosine_traj):
        grid = cosine_traj.grid
        noise = 3e-5 * np.sin(2.0 * math.pi * grid.theta / grid.theta_max)
        bad = corrupted(cosine_traj, len(cosine_traj.snapshots) // 2, noise)
        assert not check_gradient(bad).passed


class TestPhidot:
    def test_cosine_run(self, cosine_traj):
        chk = check_phidot(cosine_traj)
        assert chk.passed
        assert chk.lower <= chk.observed_min <= chk.observed_max <= chk.upper

    def test_sphere_m_is_one_over_n(self, sphere_traj):
        chk = check_phidot(sphere_traj)
        assert chk.passed
        assert chk.observed_min == pytest.approx(0.5, abs=1e-8)
        assert chk.observed_max == pytest.approx(0.5, abs=1e-8)
        # c = log r0 makes c1/(n c2) = 1/n the tight endpoint on both sides
        assert chk.lower == pytest.approx(0.5, abs=1e-8)
        assert chk.upper == pytest.approx(0.5, abs=1e-8)

    def test_constant_weight_m_identically_one_over_n(self):
        traj = run(sphere_config(alpha=0.0, t_max=1.0))
        chk = check_phidot(traj)
        assert chk.passed
        assert chk.observed_min == pytest.approx(0.5, abs=1e-10)

    def test_negative_control_alternating_noise(self, cosine_traj):
        bad = corrupted(cosine_traj, len(cosine_traj.snapshots) // 2,
                        alternating_noise(cosine_traj.grid))
        assert not check_phidot(bad).passed


class TestHTheta:
    def test_cosine_run(self, cosine_traj):
        chk = check_h_theta(cosine_traj)
        assert chk.passed
        assert chk.observed_min > 0.0
        assert chk.lower <= chk.upper

    def test_sphere_h_theta_is_n(self, sphere_traj):
        chk = check_h_theta(sphere_traj)
        assert chk.passed
        assert chk.observed_min == pytest.approx(2.0, abs=1e-8)
        assert chk.observed_max == pytest.approx(2.0, abs=1e-8)

    def test_negative_control(self, cosine_traj):
        # strong alternating noise flips the sign of the denominator, so
        # H Theta goes negative; checked directly because no corruption
        # isolates this monitor from phidot (both derive from the same
        # denominator, and the phidot interval is at least as tight)
        mid = len(cosine_traj.snapshots) // 2
        noise = alternating_noise(cosine_traj.grid, delta=5e-5)
        bad = corrupted(cosine_traj, mid, noise)
        assert not check_h_theta(bad).passed


class TestAreaIdentity:
    def test_equal_spacing_run(self, area_traj):
        chk = check_area_identity(area_traj)
        assert chk.passed
        assert chk.worst_violation <= 1e-3

    def test_sphere_closed_form(self):
        # alpha=1, n=2, cap pi/3: P(t) = pi (1 + t/2)^2, P' = pi (1 + t/2),
        # and the weighted integral is P/u = pi u: identical
        traj = run(sphere_config(alpha=1.0, t_max=1.0, cadence_t=0.01))
        chk = check_area_identity(traj)
        assert chk.passed
        assert chk.worst_violation <= 1e-5

    def test_rescaled_sandwich(self, area_traj):
        chk = check_area_identity(area_traj)
        assert "sandwich" in chk.note
        assert chk.lower <= chk.observed_min + 1e-6
        assert chk.observed_max <= chk.upper + 1e-6


class TestPsiIdentity:
    def test_sphere_residual_small(self):
        traj = run(sphere_config(alpha=1.0, t_max=1e-3, cadence_t=2e-4))
        res = check_psi_identity(traj, 2)
        assert res <= 1e-8

    def test_cosine_residual_decays_second_order(self):
        res = []
        for cells, cad in ((64, 0.02), (128, 0.01)):
            traj = run(cosine_config(cells=cells, s_max=None, t_max=0.2,
                                     conv_tol=0.0, cadence_t=cad))
            res.append(check_psi_identity(traj, len(traj.snapshots) // 2))
        assert math.log2(res[0] / res[1]) >= 1.8

    def test_boundary_index_rejected(self, cosine_traj):
        with pytest.raises(ValueError):
            check_psi_identity(cosine_traj, 0)


class TestRInf:
    def test_bounds_from_initial_only(self, cosine_traj):
        lo, hi = r_inf_bounds_from_initial(cosine_traj)
        assert lo <= hi
        # eps=0.05 data: bounds straddle 1 within the perturbation scale
        assert 0.9 < lo < 1.0 < hi < 1.1

    def test_sphere_bounds_collapse(self, sphere_traj):
        lo, hi = r_inf_bounds_from_initial(sphere_traj)
        assert lo == pytest.approx(1.0, abs=1e-12)
        assert hi == pytest.approx(1.0, abs=1e-12)


class TestConvergenceReport:
    def test_cosine_all_pass(self, cosine_traj):
        rep = convergence_report(cosine_traj)
        assert rep.all_pass, [c.name for c in rep.checks if not c.passed]
        lo, hi = rep.r_inf_bounds
        assert lo - 1e-3 <= rep.r_inf_estimate <= hi + 1e-3

    def test_sphere_omega_is_one_over_n(self, sphere_traj):
        rep = convergence_report(sphere_traj)
        om = [c for c in rep.checks if c.name == "omega_bounded"][0]
        assert om.passed
        assert om.observed_min == pytest.approx(0.5, abs=1e-8)

    def test_realized_constants_exposed(self, cosine_traj):
        rep = convergence_report(cosine_traj)
        rc = rep.realized_constants
        # cell centers stop half a cell short of theta_max, so the realized
        # extrema sit just inside the nominal +-0.05 of the cosine profile
        assert -0.05 <= rc["phi1"] < -0.0499
        assert 0.0499 < rc["phi2"] <= 0.05
        assert rc["c7"] <= 1.0 <= rc["c8"]
        assert rc["c12"] == pytest.approx(rc["c8"] / rc["c7"], rel=1e-12)
        assert 0.0 < rc["c9"] <= rc["c10"]

    def test_reproducible(self, cosine_traj):
        a = convergence_report(cosine_traj).as_dict()
        b = convergence_report(cosine_traj).as_dict()
        assert a == b

    def test_negative_controls_fail_only_their_target(self, cosine_traj):
        """Each targeted corruption trips its own check and no other."""
        n_snaps = len(cosine_traj.snapshots)
        grid = cosine_traj.grid
        mid = n_snaps // 2

        cases = {
            "c0_sandwich": (n_snaps - 1, 0.02),
            "gradient_estimate": (
                mid, 3e-5 * np.sin(2.0 * math.pi * grid.theta / grid.theta_max)),
            "phidot_estimate": (mid, alternating_noise(grid)),
        }
        # h_theta is absent as a target: its bound is assembled from the
        # c0/gradient/phidot ingredients, so no single-snapshot corruption
        # can violate it before violating one of those
        named_checks = {
            "c0_sandwich": check_c0,
            "gradient_estimate": check_gradient,
            "phidot_estimate": check_phidot,
            "h_theta_bound": check_h_theta,
        }
        for target, (idx, delta) in cases.items():
            bad = corrupted(cosine_traj, idx, delta)
            results = {name: fn(bad).passed
                       for name, fn in named_checks.items()}
            assert not results[target], f"{target} should fail"
            others = {k: v for k, v in results.items() if k != target}
            assert all(others.values()), (target, others)
