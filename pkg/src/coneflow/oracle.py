"""Independent brute-force references.

Everything here deliberately avoids the main code paths: the sphere
solution integrates a 1-d radial ODE (closed form for power weights),
the embedding oracle differentiates the actual surface of revolution,
and convergence_order implements plain Richardson order estimation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .grid import CapGrid
from .weight import WeightSpec, eval_weight


def sphere_solution(w: WeightSpec, r0: float, n: int, t: float) -> float:
    """Radius of the round-sphere solution u' = u/(n f(u)) at time t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return float(r0)
    if w.kind == "power":
        if w.alpha == 0.0:
            return r0 * math.exp(t / n)
        return (r0 ** w.alpha + w.alpha * t / n) ** (1.0 / w.alpha)
    sol = solve_ivp(lambda _t, y: [y[0] / (n * eval_weight(w, y[0]))],
                    (0.0, t), [float(r0)], method="DOP853",
                    rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise RuntimeError(f"sphere ODE integration failed: {sol.message}")
    return float(sol.y[0, -1])


def _profile_on(grid: CapGrid, phi, theta_fine: np.ndarray) -> np.ndarray:
    """Evaluate the radial profile u at arbitrary angles.

    phi may be a callable phi(theta) or per-node values; node values are
    extended by even reflection about both ends (the mirror symmetry of
    Neumann-compatible axisymmetric data) and spline-interpolated.
    """
    if callable(phi):
        return np.exp(phi(theta_fine))
    phi = np.asarray(phi, dtype=float)
    th = grid.theta
    th_ext = np.concatenate([-th[2::-1], th, 2.0 * grid.theta_max - th[:-4:-1]])
    ph_ext = np.concatenate([phi[2::-1], phi, phi[:-4:-1]])
    spline = CubicSpline(th_ext, ph_ext)
    return np.exp(spline(theta_fine))


def embedding_mean_curvature(grid: CapGrid, phi, aux_points: int = 1024) -> np.ndarray:
    """Mean curvature from the embedded surface of revolution (n = 2 only).

    Builds X(theta, psi) = u(theta) (sin th cos ps, sin th sin ps, cos th)
    on a fine auxiliary grid, takes centered differences of the embedding
    for the theta-direction fundamental forms (the psi direction is exact
    by symmetry), and interpolates H = trace(g^-1 h) back to the flow
    grid.  Sign convention: outward normal, spheres give H = 2/r > 0.
    """
    if grid.n != 2:
        raise ValueError("embedding oracle is restricted to n = 2")
    h = grid.theta_max / aux_points
    # extended fine grid: one ghost ring beyond each end for centered stencils
    theta_f = (np.arange(-1, aux_points + 1) + 0.5) * h
    theta_eval = np.where(theta_f < 0, -theta_f,
                          np.where(theta_f > grid.theta_max,
                                   2.0 * grid.theta_max - theta_f, theta_f))
    u = _profile_on(grid, phi, theta_eval)

    x = u * np.sin(theta_f)      # profile plane at psi = 0
    z = u * np.cos(theta_f)
    xt = (x[2:] - x[:-2]) / (2.0 * h)
    zt = (z[2:] - z[:-2]) / (2.0 * h)
    xtt = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / h ** 2
    ztt = (z[2:] - 2.0 * z[1:-1] + z[:-2]) / h ** 2
    xi, zi = x[1:-1], z[1:-1]
    theta_i = theta_f[1:-1]

    # outward normal in the profile plane: rotate the tangent, orient along X
    norm = np.hypot(xt, zt)
    nx, nz = zt / norm, -xt / norm
    flip = np.sign(nx * xi + nz * zi)
    nx, nz = nx * flip, nz * flip

    g_tt = xt ** 2 + zt ** 2
    g_pp = xi ** 2                          # (u sin theta)^2
    h_tt = -(xtt * nx + ztt * nz)
    # X_psipsi = (-u sin th, 0, 0) at psi = 0
    h_pp = xi * nx
    H_fine = h_tt / g_tt + h_pp / g_pp
    if not np.all(np.isfinite(H_fine)):
        raise FloatingPointError("embedding oracle produced non-finite values")
    return np.interp(grid.theta, theta_i, H_fine)


@dataclass
class OrderEstimate:
    errors: tuple
    orders: tuple
    window: tuple
    passed: bool
    note: str = ""


def convergence_order(errors, window=(1.7, 2.3)) -> OrderEstimate:
    """Observed Richardson orders from errors at J, 2J, 4J."""
    errors = tuple(float(e) for e in errors)
    if len(errors) != 3:
        raise ValueError("need exactly three errors (coarse, medium, fine)")
    if any(e <= 0 for e in errors) or not (errors[0] > errors[1] > errors[2]):
        return OrderEstimate(errors=errors, orders=(), window=tuple(window),
                             passed=False,
                             note="errors not positive and decreasing: "
                                  "scheme not in asymptotic range")
    p1 = math.log2(errors[0] / errors[1])
    p2 = math.log2(errors[1] / errors[2])
    ok = all(window[0] <= p <= window[1] for p in (p1, p2))
    return OrderEstimate(errors=errors, orders=(p1, p2),
                         window=tuple(window), passed=ok)
