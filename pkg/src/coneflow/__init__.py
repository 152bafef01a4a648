"""Weighted inverse mean curvature flow of radial graphs in a convex cone.

Solver for the scalar Neumann problem of the flow with speed 1/(f(r)H)
over a geodesic cap, plus a verification harness that turns the C0,
speed, gradient and curvature estimates, the area identity, and the
rescaled-convergence bounds into machine-checkable monitors.
"""

from ._kernels import backend_name
from .flow import FlowConfig, FlowState, Trajectory, run
from .grid import CapGrid, build_grid
from .weight import WeightSpec

__all__ = [
    "CapGrid", "FlowConfig", "FlowState", "Trajectory", "WeightSpec",
    "backend_name", "build_grid", "run",
]

__version__ = "0.1.0"
