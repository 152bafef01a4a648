import math

import numpy as np
import pytest

from coneflow.geometry import compute_fields, hypersurface_area, star_shape_ratio
from coneflow.grid import base_area, build_grid
from coneflow.oracle import convergence_order

from util import power_weight

GRID = build_grid(2, math.pi / 3, 128)


def cosine_phi(grid, eps=0.05):
    return eps * np.cos(math.pi * grid.theta / grid.theta_max)


class TestSphereFields:
    def test_radius_two(self):
        f = compute_fields(GRID, power_weight(1.0), np.full(128, math.log(2.0)))
        np.testing.assert_allclose(f.v, 1.0)
        np.testing.assert_allclose(f.denom, 2.0)
        np.testing.assert_allclose(f.H, 1.0)       # n / r
        np.testing.assert_allclose(f.w, 2.0)
        np.testing.assert_allclose(f.Phi, 0.5)     # 1 / (f(2) H)
        np.testing.assert_allclose(f.Psi, 0.25)

    def test_unit_sphere_any_n(self):
        for n in (1, 2, 3, 5):
            g = build_grid(n, math.pi / 3, 64)
            f = compute_fields(g, power_weight(0.0), np.zeros(64))
            np.testing.assert_allclose(f.v, 1.0)
            np.testing.assert_allclose(f.denom, float(n))
            np.testing.assert_allclose(f.H, float(n))
            np.testing.assert_allclose(f.w, 1.0)

    def test_non_finite_rejected(self):
        phi = np.zeros(128)
        phi[3] = np.nan
        with pytest.raises(ValueError):
            compute_fields(GRID, power_weight(1.0), phi)


class TestAlgebraicIdentities:
    """Identities that hold in the discrete algebra by construction."""

    @pytest.mark.parametrize("eps", [0.0, 0.05, 0.2])
    def test_h_u_v_equals_denom(self, eps):
        f = compute_fields(GRID, power_weight(1.0), cosine_phi(GRID, eps))
        np.testing.assert_allclose(f.H * f.u * f.v, f.denom, atol=1e-12)

    def test_support_and_psi_relations(self):
        f = compute_fields(GRID, power_weight(2.0), cosine_phi(GRID))
        np.testing.assert_allclose(f.w * f.v, f.u, atol=1e-12)
        np.testing.assert_allclose(f.Psi * f.w, f.Phi, atol=1e-12)

    def test_v_at_least_one(self):
        f = compute_fields(GRID, power_weight(1.0), cosine_phi(GRID, 0.3))
        assert np.all(f.v >= 1.0)


class TestArea:
    def test_scaled_cap(self):
        # cap of angle pi/3 on radius r: area = pi r^2
        area = hypersurface_area(GRID, np.full(128, math.log(2.0)))
        assert area == pytest.approx(4.0 * math.pi, rel=1e-4)

    def test_unit_graph_matches_base_area(self):
        assert hypersurface_area(GRID, np.zeros(128)) == pytest.approx(
            base_area(GRID), rel=1e-14)

    def test_refinement_order(self):
        # high-resolution quadrature as the reference value
        ref_grid = build_grid(2, math.pi / 3, 8192)
        ref = hypersurface_area(ref_grid, cosine_phi(ref_grid))
        errs = []
        for cells in (64, 128, 256):
            g = build_grid(2, math.pi / 3, cells)
            errs.append(abs(hypersurface_area(g, cosine_phi(g)) - ref))
        est = convergence_order(errs)
        assert est.passed, est


class TestStarShape:
    def test_constant_profile(self):
        f = compute_fields(GRID, power_weight(1.0), np.full(128, 0.3))
        assert star_shape_ratio(f) == 1.0

    def test_gradient_bound(self):
        phi = cosine_phi(GRID, 0.2)
        f = compute_fields(GRID, power_weight(1.0), phi)
        g0 = float(np.max(np.abs(f.phi_t)))
        assert star_shape_ratio(f) >= 1.0 / math.sqrt(1.0 + g0 ** 2) - 1e-12
