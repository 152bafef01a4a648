"""Shared builders for the test suite."""

import math

from coneflow.flow import FlowConfig
from coneflow.weight import WeightSpec

THETA_MAX = math.pi / 3.0


def power_weight(alpha: float) -> WeightSpec:
    """Power weight with its exact assumption constants.

    f(y g) = y^alpha f(g), so the scale band on y in [0.5, 2] is
    [0.5^alpha, 2^alpha] exactly, and y f'/f == alpha.
    """
    if alpha == 0.0:
        return WeightSpec(kind="power", alpha=0.0)
    return WeightSpec(kind="power", alpha=alpha, c1=alpha, c2=alpha,
                      c3=0.5, c4=2.0, c5=0.5 ** alpha, c6=2.0 ** alpha)


def log1p_weight() -> WeightSpec:
    # y f'/f in [0.8548, 1.0) on (0, inf); scale band on y in [0.5, 2]
    # is contained in [0.5, 2.0] (concavity of log(1+y))
    return WeightSpec(kind="log1p", c1=0.85, c2=1.0,
                      c3=0.5, c4=2.0, c5=0.5, c6=2.0)


def sigmoid_exp_weight() -> WeightSpec:
    # y f'/f in (1.0, 1.2785]; scale band numerically within [0.414, 2.415]
    return WeightSpec(kind="sigmoid_exp", c1=1.0, c2=1.279,
                      c3=0.5, c4=2.0, c5=0.41, c6=2.45)


def cosine_config(weight=None, cells=128, eps=0.05, s_max=10.0,
                  **overrides) -> FlowConfig:
    """The workhorse perturbed-cap configuration of the acceptance suite."""
    kwargs = dict(
        n=2, theta_max=THETA_MAX, cells=cells,
        weight=weight if weight is not None else power_weight(1.0),
        initial={"kind": "cosine", "r0": 1.0, "eps": eps},
        cfl=0.25, s_max=s_max, conv_tol=1e-6, cadence_s=0.05,
    )
    kwargs.update(overrides)
    return FlowConfig(**kwargs)


def sphere_config(alpha=1.0, r0=1.0, cells=128, t_max=1.0,
                  **overrides) -> FlowConfig:
    kwargs = dict(
        n=2, theta_max=THETA_MAX, cells=cells, weight=power_weight(alpha),
        initial={"kind": "constant", "r0": r0},
        cfl=0.25, t_max=t_max, conv_tol=0.0, cadence_t=t_max / 4.0,
    )
    kwargs.update(overrides)
    return FlowConfig(**kwargs)
