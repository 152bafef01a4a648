"""Cell-centered discretization of the geodesic cap {theta <= theta_max}.

Nodes sit at theta_j = (j + 1/2) dtheta, so neither the pole (theta = 0)
nor the cone boundary (theta = theta_max) carries a node.  The zero-flux
condition at both ends is realized by mirror ghosts: the ghost value
outside either end equals the adjacent interior value.  At theta_max this
is the Neumann boundary condition of the flow; at the pole it is the
regularity of an axisymmetric field.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CapGrid:
    n: int            # hypersurface dimension; ambient space is R^(n+1)
    theta_max: float  # cap half-angle, in (0, pi/2]
    cells: int        # number of cell-centered nodes
    dtheta: float
    theta: np.ndarray     # node angles, shape (cells,)
    sin_theta: np.ndarray
    cot_theta: np.ndarray
    omega: float      # measure of the angular factor S^(n-1)

    def __hash__(self):
        return hash((self.n, self.theta_max, self.cells))


def angular_measure(n: int) -> float:
    """|S^(n-1)| for n >= 2, and 1 for n = 1 (no angular factor)."""
    if n == 1:
        return 1.0
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def build_grid(n: int, theta_max: float, cells: int) -> CapGrid:
    if n < 1:
        raise ValueError("dimension n must be >= 1")
    if not 0.0 < theta_max <= math.pi / 2.0 + 1e-15:
        raise ValueError(
            f"theta_max = {theta_max} outside (0, pi/2]: cone would not be convex")
    if theta_max >= math.pi / 2.0 - 1e-15:
        warnings.warn("theta_max = pi/2: cone boundary is only weakly convex",
                      stacklevel=2)
    if cells < 8:
        raise ValueError("need at least 8 cells")
    dtheta = theta_max / cells
    theta = (np.arange(cells) + 0.5) * dtheta
    return CapGrid(
        n=n, theta_max=float(theta_max), cells=cells, dtheta=dtheta,
        theta=theta, sin_theta=np.sin(theta), cot_theta=1.0 / np.tan(theta),
        omega=angular_measure(n),
    )


def _check_field(grid: CapGrid, field: np.ndarray) -> np.ndarray:
    field = np.asarray(field, dtype=float)
    if field.shape != (grid.cells,):
        raise ValueError(f"field has shape {field.shape}, expected ({grid.cells},)")
    return field


def d1(grid: CapGrid, field) -> np.ndarray:
    """Centered first derivative in theta with mirror ghosts at both ends."""
    f = _check_field(grid, field)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * grid.dtheta)
    out[0] = (f[1] - f[0]) / (2.0 * grid.dtheta)
    out[-1] = (f[-1] - f[-2]) / (2.0 * grid.dtheta)
    return out


def d2(grid: CapGrid, field) -> np.ndarray:
    """Three-point second derivative in theta with mirror ghosts."""
    f = _check_field(grid, field)
    out = np.empty_like(f)
    h2 = grid.dtheta ** 2
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
    out[0] = (f[1] - f[0]) / h2
    out[-1] = (f[-2] - f[-1]) / h2
    return out


def base_area(grid: CapGrid) -> float:
    """Midpoint-rule n-measure of the spherical base cap."""
    return grid.omega * float(np.sum(grid.sin_theta ** (grid.n - 1))) * grid.dtheta
