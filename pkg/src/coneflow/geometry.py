"""Derived geometry of the radial graph u = e^phi over the cap.

All quantities follow from the graph representation X = u(x) x:

  v     = sqrt(1 + phi_theta^2)
  denom = n - phi_thth / v^2 - (n-1) cot(theta) phi_theta
  H     = e^-phi v^-1 denom          (mean curvature)
  w     = u / v                      (support function <X, nu>)
  Phi   = 1 / (f(u) H)               (flow speed)
  Psi   = Phi / w = v / (u f(u) H)
  area_elem = e^(n phi) v sin^(n-1)(theta)   (dH^n density per dtheta)

denom is reported as computed even when it is nonpositive; enforcing
strict mean convexity is the flow module's job.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CapGrid, d1, d2
from .weight import WeightSpec, eval_weight


@dataclass(frozen=True)
class GeometryFields:
    phi: np.ndarray
    u: np.ndarray
    phi_t: np.ndarray   # d phi / d theta
    v: np.ndarray
    denom: np.ndarray
    H: np.ndarray
    w: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    area_elem: np.ndarray


def compute_fields(grid: CapGrid, w: WeightSpec, phi) -> GeometryFields:
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise ValueError("phi contains non-finite values")
    phi_t = d1(grid, phi)
    phi_tt = d2(grid, phi)
    v = np.sqrt(1.0 + phi_t ** 2)
    denom = grid.n - phi_tt / v ** 2 - (grid.n - 1) * grid.cot_theta * phi_t
    u = np.exp(phi)
    H = denom / (u * v)
    supp = u / v
    f_u = eval_weight(w, u)
    speed = 1.0 / (f_u * H)
    psi = speed / supp
    area_elem = u ** grid.n * v * grid.sin_theta ** (grid.n - 1)
    return GeometryFields(phi=phi, u=u, phi_t=phi_t, v=v, denom=denom, H=H,
                          w=supp, Phi=speed, Psi=psi, area_elem=area_elem)


def hypersurface_area(grid: CapGrid, phi) -> float:
    """n-measure of the graph: omega * sum e^(n phi) v sin^(n-1) theta dtheta."""
    phi = np.asarray(phi, dtype=float)
    phi_t = d1(grid, phi)
    v = np.sqrt(1.0 + phi_t ** 2)
    integrand = np.exp(grid.n * phi) * v * grid.sin_theta ** (grid.n - 1)
    return grid.omega * float(np.sum(integrand)) * grid.dtheta


def star_shape_ratio(fields: GeometryFields) -> float:
    """min_j <X/|X|, nu> = min_j 1/v_j, the worst-case star-shapedness."""
    return float(np.min(1.0 / fields.v))
