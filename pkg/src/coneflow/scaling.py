"""Comparison/scaling ODE and the s <-> t time maps.

The spatially homogeneous solution phibar_c(t) of the flow solves

    d phibar / dt = 1 / (n f(e^phibar)),   phibar(0) = c,

and defines the scaling factor Theta(t, c) = e^phibar_c(t).  The slow
time s satisfies dt/ds = f(Theta), i.e. s(t) = int_0^t dt'/f(Theta(t')),
accumulated here as a second ODE component.

For a general weight the solution depends nonlinearly on c, so the family
is represented per-c rather than through an additive shift; all estimate
monitors consume it in comparison-solution form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .weight import WeightSpec, eval_weight


class ScalingRangeError(ValueError):
    """Evaluation outside the integrated time range."""


@dataclass(frozen=True)
class ScalingSolution:
    c: float
    n: int
    weight: WeightSpec
    t_max: float
    s_max: float
    t_knots: np.ndarray
    phibar_knots: np.ndarray
    s_knots: np.ndarray
    _dense: object = field(repr=False, compare=False, default=None)

    def phibar_at(self, t: float) -> float:
        _check_t(self, t)
        return float(self._dense(t)[0])

    # vectorized helpers used by monitors
    def phibar_many(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-12) or np.any(t > self.t_max * (1 + 1e-12) + 1e-12):
            raise ScalingRangeError("t outside integrated range")
        return self._dense(np.clip(t, 0.0, self.t_max))[0]


def _check_t(sol: ScalingSolution, t: float):
    if t < -1e-12 or t > sol.t_max * (1 + 1e-12) + 1e-12:
        raise ScalingRangeError(
            f"t = {t} outside integrated range [0, {sol.t_max}]")


def solve_scaling_ode(w: WeightSpec, c: float, n: int, t_max: float = None,
                      s_max: float = None, rtol: float = 1e-11) -> ScalingSolution:
    """Integrate the comparison ODE together with s(t).

    Exactly one of t_max, s_max may drive the stopping point; if s_max is
    given the integration extends until s reaches it (plus a small margin).
    """
    if not 1e-14 < rtol < 1e-3:
        raise ValueError("rtol outside (1e-14, 1e-3)")
    if (t_max is None) == (s_max is None):
        raise ValueError("give exactly one of t_max or s_max")

    def rhs(t, y):
        f_theta = eval_weight(w, math.exp(y[0]))
        if f_theta <= 0.0 or not math.isfinite(f_theta):
            raise FloatingPointError(
                f"f(Theta) = {f_theta} along the comparison trajectory at t={t}")
        inv = 1.0 / f_theta
        return [inv / n, inv]

    if t_max is not None:
        if t_max <= 0:
            raise ValueError("t_max must be positive")
        sol = solve_ivp(rhs, (0.0, t_max), [c, 0.0], method="DOP853",
                        rtol=rtol, atol=1e-14, dense_output=True)
        if not sol.success:
            raise RuntimeError(f"comparison ODE integration failed: {sol.message}")
        t_end = t_max
    else:
        if s_max <= 0:
            raise ValueError("s_max must be positive")

        def hit_s(t, y):
            return y[1] - s_max * 1.02 - 1e-9
        hit_s.terminal = True
        hit_s.direction = 1.0
        # crude upper bound on t: grow until the event fires
        t_hi = 1.0
        for _ in range(400):
            sol = solve_ivp(rhs, (0.0, t_hi), [c, 0.0], method="DOP853",
                            rtol=rtol, atol=1e-14, dense_output=True,
                            events=hit_s)
            if not sol.success and sol.status != 1:
                raise RuntimeError(f"comparison ODE integration failed: {sol.message}")
            if sol.t_events[0].size > 0 or sol.y[1, -1] >= s_max:
                break
            t_hi *= 4.0
        else:
            raise RuntimeError("could not bracket s_max in comparison ODE")
        t_end = float(sol.t[-1])

    return ScalingSolution(
        c=float(c), n=n, weight=w, t_max=t_end, s_max=float(sol.y[1, -1]),
        t_knots=sol.t.copy(), phibar_knots=sol.y[0].copy(),
        s_knots=sol.y[1].copy(), _dense=sol.sol,
    )


def theta_at(sol: ScalingSolution, t: float) -> float:
    """Theta(t, c) = e^phibar_c(t)."""
    return math.exp(sol.phibar_at(t))


def s_of_t(sol: ScalingSolution, t: float) -> float:
    _check_t(sol, t)
    return float(sol._dense(t)[1])


def t_of_s(sol: ScalingSolution, s: float) -> float:
    """Invert the monotone map s(t) by bracketed root-finding."""
    if s < -1e-12 or s > sol.s_max * (1 + 1e-12) + 1e-12:
        raise ScalingRangeError(f"s = {s} outside integrated range [0, {sol.s_max}]")
    if s <= 0.0:
        return 0.0
    return float(brentq(lambda t: s_of_t(sol, t) - s, 0.0, sol.t_max,
                        xtol=1e-14, rtol=1e-15))


def sphere_theta_closed_form(alpha: float, r0: float, n: int, t) -> np.ndarray:
    """Closed-form Theta for power weights; used as an oracle elsewhere."""
    t = np.asarray(t, dtype=float)
    if alpha == 0.0:
        return r0 * np.exp(t / n)
    return (r0 ** alpha + alpha * t / n) ** (1.0 / alpha)
