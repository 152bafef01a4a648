"""Pure-numpy time stepping kernel (fallback backend).

Same contract as the compiled kernel in _core.pyx: advance phi by
explicit RK4 with a parabolic CFL step until t_end, applying mirror
ghosts inside every stage.  Returns (t, steps, min_denom, status) with
status 0 on success, 1 when the mean-convexity floor is crossed, and
2 when a non-finite value appears.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def _rhs(phi, n, dtheta, cot_theta, f_of_u):
    """Q(phi) together with min_j(f D^2) for the CFL bound and min denom."""
    phi_t = np.empty_like(phi)
    phi_t[1:-1] = (phi[2:] - phi[:-2]) / (2.0 * dtheta)
    phi_t[0] = (phi[1] - phi[0]) / (2.0 * dtheta)
    phi_t[-1] = (phi[-1] - phi[-2]) / (2.0 * dtheta)

    phi_tt = np.empty_like(phi)
    h2 = dtheta * dtheta
    phi_tt[1:-1] = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / h2
    phi_tt[0] = (phi[1] - phi[0]) / h2
    phi_tt[-1] = (phi[-2] - phi[-1]) / h2

    v2 = 1.0 + phi_t ** 2
    denom = n - phi_tt / v2 - (n - 1) * cot_theta * phi_t
    f_u = f_of_u(np.exp(phi))
    q = v2 / (f_u * denom)
    return q, float(np.min(f_u * denom ** 2)), float(np.min(denom))


def advance(phi, t, t_end, n, dtheta, cot_theta, cfl, denom_floor,
            f_of_u, max_steps):
    """Integrate phi (modified in place) from t to t_end."""
    steps = 0
    min_denom_seen = np.inf
    while t < t_end - 1e-15 * max(1.0, t_end):
        if steps >= max_steps:
            break
        k1, fd2, dmin = _rhs(phi, n, dtheta, cot_theta, f_of_u)
        min_denom_seen = min(min_denom_seen, dmin)
        if dmin <= denom_floor:
            return t, steps, min_denom_seen, 1
        dt = min(cfl * dtheta * dtheta * fd2, t_end - t)
        k2, _, d2min = _rhs(phi + 0.5 * dt * k1, n, dtheta, cot_theta, f_of_u)
        k3, _, d3min = _rhs(phi + 0.5 * dt * k2, n, dtheta, cot_theta, f_of_u)
        k4, _, d4min = _rhs(phi + dt * k3, n, dtheta, cot_theta, f_of_u)
        stage_min = min(d2min, d3min, d4min)
        min_denom_seen = min(min_denom_seen, stage_min)
        if stage_min <= denom_floor:
            return t, steps, min_denom_seen, 1
        phi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(phi)):
            return t, steps, min_denom_seen, 2
        t += dt
        steps += 1
    return t, steps, min_denom_seen, 0
