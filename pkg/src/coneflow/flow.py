"""Time integration of the scalar Neumann problem d phi/dt = Q.

Q(phi) = v^2 / (f(e^phi) D) with D = n - phi_thth/v^2 - (n-1)cot(theta)
phi_theta.  The integrator is explicit RK4 with the parabolic CFL step

    dt = cfl * dtheta^2 * min_j f_j D_j^2,

the reciprocal of the largest diffusion coefficient dQ/dphi_thth =
1/(f D^2).  Strict mean convexity (D > denom_floor) is enforced at every
stage.  Runs integrate in physical time t; the rescaled profile
u_tilde = u / Theta(t, c) and slow time s are recovered from the scaling
module, and output snapshots are paced in s by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .geometry import compute_fields, hypersurface_area, star_shape_ratio
from .grid import CapGrid, build_grid, d1, d2
from .scaling import ScalingSolution, s_of_t, solve_scaling_ode, t_of_s, theta_at
from .weight import WeightSpec, eval_weight

SERIES_COLUMNS = ("t", "s", "Theta", "P", "sup_grad", "min_denom",
                  "min_HTheta", "max_HTheta", "min_M", "max_M",
                  "osc_u_tilde", "star_ratio", "min_Omega", "max_Omega")


class SingularityError(RuntimeError):
    """Mean convexity lost: the operator denominator fell below the floor."""

    def __init__(self, min_denom, node):
        self.min_denom = min_denom
        self.node = node
        super().__init__(
            f"denominator {min_denom:.3e} <= floor at node {node}")


class InitialProfileError(ValueError):
    """Initial data violates a hypothesis (mean convexity, Neumann, ...)."""


@dataclass
class FlowState:
    t: float
    phi: np.ndarray
    step_count: int = 0
    last_dt: float = 0.0


@dataclass
class FlowConfig:
    n: int
    theta_max: float
    cells: int
    weight: WeightSpec
    initial: dict
    cfl: float = 0.25
    t_max: float = None
    s_max: float = None
    denom_floor: float = 1e-6
    conv_tol: float = 1e-6
    rescale_c: object = "midpoint"   # "midpoint" | "inf" | "sup" | number
    cadence_s: float = 0.05
    cadence_t: float = None          # overrides s pacing when set
    max_steps: int = 50_000_000

    def __post_init__(self):
        if self.t_max is None and self.s_max is None:
            raise ValueError("set t_max, s_max, or both")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must be in (0, 1]")
        if self.denom_floor <= 0.0:
            raise ValueError("denom_floor must be positive")


@dataclass
class Trajectory:
    grid: CapGrid
    weight: WeightSpec
    config: FlowConfig
    snapshots: list
    series: dict
    status: str
    phi1: float
    phi2: float
    c: float
    sol_c: ScalingSolution
    sol_lo: ScalingSolution
    sol_hi: ScalingSolution
    backend: str
    total_steps: int


def initial_profile(grid: CapGrid, spec: dict) -> np.ndarray:
    """Build and validate phi0 from an initial-profile spec.

    Kinds: {"kind": "constant", "r0"}, {"kind": "cosine", "r0", "eps"}
    (phi0 = log r0 + eps cos(pi theta / theta_max), Neumann-compatible by
    construction) and {"kind": "tabulated", "phi": [...]}.
    """
    kind = spec.get("kind")
    if kind == "constant":
        r0 = float(spec["r0"])
        if r0 <= 0:
            raise InitialProfileError("r0 must be positive")
        phi = np.full(grid.cells, math.log(r0))
    elif kind == "cosine":
        r0 = float(spec["r0"])
        eps = float(spec["eps"])
        if r0 <= 0:
            raise InitialProfileError("r0 must be positive")
        phi = math.log(r0) + eps * np.cos(math.pi * grid.theta / grid.theta_max)
    elif kind == "tabulated":
        phi = np.asarray(spec["phi"], dtype=float)
        if phi.shape != (grid.cells,):
            raise InitialProfileError(
                f"tabulated profile has {phi.size} values, grid has {grid.cells}")
    else:
        raise InitialProfileError(f"unknown initial profile kind {kind!r}")

    if not np.all(np.isfinite(phi)):
        raise InitialProfileError("initial profile contains non-finite values")

    # Neumann compatibility: the mirror-stencil derivative at the boundary
    # nodes must be O(dtheta) relative to the interior gradient scale.
    g = d1(grid, phi)
    scale = max(float(np.max(np.abs(g))), 1e-30)
    tol = max(1e-10, 5.0 * (grid.dtheta / grid.theta_max) * scale)
    if abs(g[0]) > tol or abs(g[-1]) > tol:
        raise InitialProfileError(
            f"initial profile is not Neumann-compatible: boundary gradients "
            f"({g[0]:.3e}, {g[-1]:.3e}) exceed {tol:.3e}")

    denom = _denominator(grid, phi)
    if np.any(denom <= 0.0):
        node = int(np.argmin(denom))
        raise InitialProfileError(
            f"initial profile is not strictly mean convex: denom = "
            f"{denom[node]:.3e} at node {node} (theta = {grid.theta[node]:.4f})")
    return phi


def _denominator(grid: CapGrid, phi: np.ndarray) -> np.ndarray:
    phi_t = d1(grid, phi)
    v2 = 1.0 + phi_t ** 2
    return grid.n - d2(grid, phi) / v2 - (grid.n - 1) * grid.cot_theta * phi_t


def q_operator(grid: CapGrid, w: WeightSpec, phi, denom_floor: float = 1e-6):
    """phi_dot = Q(phi), raising SingularityError if D <= denom_floor."""
    phi = np.asarray(phi, dtype=float)
    denom = _denominator(grid, phi)
    if np.min(denom) <= denom_floor:
        node = int(np.argmin(denom))
        raise SingularityError(float(denom[node]), node)
    phi_t = d1(grid, phi)
    v2 = 1.0 + phi_t ** 2
    f_u = eval_weight(w, np.exp(phi))
    return v2 / (f_u * denom)


def stable_dt(grid: CapGrid, w: WeightSpec, phi, cfl: float,
              denom_floor: float = 1e-6) -> float:
    """cfl * dtheta^2 / max_j [1 / (f_j D_j^2)]."""
    phi = np.asarray(phi, dtype=float)
    denom = _denominator(grid, phi)
    if np.min(denom) <= denom_floor:
        node = int(np.argmin(denom))
        raise SingularityError(float(denom[node]), node)
    f_u = eval_weight(w, np.exp(phi))
    return cfl * grid.dtheta ** 2 * float(np.min(f_u * denom ** 2))


def step(grid: CapGrid, w: WeightSpec, state: FlowState, dt: float,
         denom_floor: float = 1e-6) -> FlowState:
    """One classical RK4 step; mirror ghosts act inside every stage."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    phi = state.phi
    k1 = q_operator(grid, w, phi, denom_floor)
    k2 = q_operator(grid, w, phi + 0.5 * dt * k1, denom_floor)
    k3 = q_operator(grid, w, phi + 0.5 * dt * k2, denom_floor)
    k4 = q_operator(grid, w, phi + dt * k3, denom_floor)
    new_phi = phi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new_phi)):
        raise FloatingPointError("non-finite values after RK4 step")
    return FlowState(t=state.t + dt, phi=new_phi,
                     step_count=state.step_count + 1, last_dt=dt)


def _advance(grid: CapGrid, w: WeightSpec, phi: np.ndarray, t: float,
             t_end: float, cfl: float, denom_floor: float, max_steps: int):
    """Dispatch the inner stepping loop to the selected kernel backend."""
    if _kernels.HAVE_COMPILED and w.kind in _kernels.WKIND_CODES:
        return _kernels.compiled.advance(
            phi, t, t_end, grid.n, grid.dtheta, grid.cot_theta, cfl,
            denom_floor, _kernels.WKIND_CODES[w.kind], w.alpha, max_steps)
    f_of_u = lambda u: eval_weight(w, u)  # noqa: E731
    return _kernels.pure.advance(
        phi, t, t_end, grid.n, grid.dtheta, grid.cot_theta, cfl,
        denom_floor, f_of_u, max_steps)


def _pick_c(choice, phi1: float, phi2: float) -> float:
    if choice == "midpoint":
        return 0.5 * (phi1 + phi2)
    if choice == "inf":
        return phi1
    if choice == "sup":
        return phi2
    c = float(choice)
    if not phi1 - 1e-12 <= c <= phi2 + 1e-12:
        raise ValueError(f"rescale constant {c} outside [inf phi0, sup phi0]")
    return c


def _diagnostics(grid, w, phi, t, sol_c):
    fields = compute_fields(grid, w, phi)
    theta_t = theta_at(sol_c, t)
    f_theta = eval_weight(w, theta_t)
    u_tilde = fields.u / theta_t
    # phi_dot from the PDE right side, not time differences
    m_field = (fields.v ** 2 / (eval_weight(w, fields.u) * fields.denom)) * f_theta
    h_theta = fields.H * theta_t
    omega_field = fields.Psi * f_theta
    return {
        "t": t,
        "s": s_of_t(sol_c, t),
        "Theta": theta_t,
        "P": hypersurface_area(grid, phi),
        "sup_grad": float(np.max(np.abs(fields.phi_t))),
        "min_denom": float(np.min(fields.denom)),
        "min_HTheta": float(np.min(h_theta)),
        "max_HTheta": float(np.max(h_theta)),
        "min_M": float(np.min(m_field)),
        "max_M": float(np.max(m_field)),
        "osc_u_tilde": float(np.max(u_tilde) - np.min(u_tilde)),
        "star_ratio": star_shape_ratio(fields),
        "min_Omega": float(np.min(omega_field)),
        "max_Omega": float(np.max(omega_field)),
    }


def run(config: FlowConfig) -> Trajectory:
    """Integrate the flow, recording snapshots and scalar diagnostics."""
    grid = build_grid(config.n, config.theta_max, config.cells)
    w = config.weight
    phi0 = initial_profile(grid, config.initial)
    phi1 = float(np.min(phi0))
    phi2 = float(np.max(phi0))
    c = _pick_c(config.rescale_c, phi1, phi2)

    # scaling solution for the configured c fixes the time horizon
    if config.s_max is not None and config.t_max is None:
        sol_c = solve_scaling_ode(w, c, grid.n, s_max=config.s_max)
        t_end = t_of_s(sol_c, config.s_max)
    else:
        sol_c = solve_scaling_ode(w, c, grid.n, t_max=config.t_max * 1.0001)
        t_end = config.t_max
        if config.s_max is not None and s_of_t(sol_c, t_end) > config.s_max:
            t_end = t_of_s(sol_c, config.s_max)
    t_margin = t_end * 1.0001 + 1e-9
    sol_lo = solve_scaling_ode(w, phi1, grid.n, t_max=t_margin)
    sol_hi = solve_scaling_ode(w, phi2, grid.n, t_max=t_margin)

    # output schedule
    if config.cadence_t is not None:
        k_max = int(math.floor(t_end / config.cadence_t + 1e-9))
        out_times = [k * config.cadence_t for k in range(1, k_max + 1)]
    else:
        s_end = s_of_t(sol_c, t_end)
        k_max = int(math.floor(s_end / config.cadence_s + 1e-9))
        out_times = [t_of_s(sol_c, k * config.cadence_s)
                     for k in range(1, k_max + 1)]
    if not out_times or out_times[-1] < t_end * (1 - 1e-12):
        out_times.append(t_end)

    phi = phi0.copy()
    t = 0.0
    total_steps = 0
    snapshots = [FlowState(t=0.0, phi=phi0.copy())]
    series = {k: [] for k in SERIES_COLUMNS}
    diag = _diagnostics(grid, w, phi0, 0.0, sol_c)
    for k in SERIES_COLUMNS:
        series[k].append(diag[k])

    status = "t_max_reached"
    if diag["osc_u_tilde"] < config.conv_tol:
        status = "converged"
    else:
        for t_next in out_times:
            t, steps, min_denom, kstatus = _advance(
                grid, w, phi, t, t_next, config.cfl, config.denom_floor,
                config.max_steps - total_steps)
            total_steps += steps
            if kstatus != 0:
                # drop the failed partial state to keep series aligned
                status = "singularity"
                break
            if total_steps >= config.max_steps:
                raise RuntimeError("step budget exhausted before t_end")
            snapshots.append(FlowState(t=t, phi=phi.copy(),
                                       step_count=total_steps))
            diag = _diagnostics(grid, w, phi, t, sol_c)
            for k in SERIES_COLUMNS:
                series[k].append(diag[k])
            if diag["osc_u_tilde"] < config.conv_tol:
                status = "converged"
                break

    return Trajectory(grid=grid, weight=w, config=config, snapshots=snapshots,
                      series=series, status=status, phi1=phi1, phi2=phi2,
                      c=c, sol_c=sol_c, sol_lo=sol_lo, sol_hi=sol_hi,
                      backend=_kernels.backend_name(), total_steps=total_steps)
