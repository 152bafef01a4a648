"""Radial weight functions and structural-assumption auditing.

The flow speed is 1/(f(r)H).  Built-in weight kinds:

  power       f(y) = y**alpha            (alpha = 0 is the constant weight)
  log1p       f(y) = y + log(1 + y)
  sigmoid_exp f(y) = e^y * y / (1 + e^y)
  tabulated   monotone-cubic interpolant of user samples

Each weight carries declared constants c1..c6:
  c1 <= y f'(y)/f(y) <= c2          (log-derivative band)
  for y in [c3, c4] and any scale g: c5 f(g) <= f(y g) <= c6 f(g)

The constants are user-declared and spot-checked by verify_assumptions,
not derived: the scale-band condition quantifies over an unbounded family
of scales and can only be sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

KINDS = ("power", "log1p", "sigmoid_exp", "tabulated")


class WeightDomainError(ValueError):
    """Raised when a weight is evaluated outside its domain."""


@dataclass(frozen=True)
class WeightSpec:
    """Immutable description of the radial weight f and its constants."""

    kind: str
    alpha: float = 0.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 0.5
    c4: float = 2.0
    c5: float = 0.5
    c6: float = 2.0
    table_y: tuple = ()
    table_f: tuple = ()
    _interp: object = field(default=None, repr=False, compare=False)
    _interp_d: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "power" and self.alpha < 0:
            raise ValueError("power weight needs alpha >= 0")
        if not (self.c1 <= self.c2 and self.c3 <= self.c4 and self.c5 <= self.c6):
            raise ValueError("weight constants must satisfy c1<=c2, c3<=c4, c5<=c6")
        if min(self.c3, self.c5) <= 0:
            raise ValueError("c3..c6 must be positive")
        if self.kind == "tabulated":
            y = np.asarray(self.table_y, dtype=float)
            fv = np.asarray(self.table_f, dtype=float)
            if y.size < 4 or y.size != fv.size:
                raise ValueError("tabulated weight needs >= 4 (y, f) samples")
            if np.any(np.diff(y) <= 0):
                raise ValueError("tabulated y samples must be strictly increasing")
            if np.any(fv[y > 0] <= 0):
                raise ValueError("tabulated f must be positive for y > 0")
            interp = PchipInterpolator(y, fv, extrapolate=False)
            object.__setattr__(self, "_interp", interp)
            object.__setattr__(self, "_interp_d", interp.derivative())

    @property
    def is_constant(self) -> bool:
        """Constant-weight escape clause: power with alpha = 0."""
        return self.kind == "power" and self.alpha == 0.0

    def describe(self) -> dict:
        d = {"kind": self.kind, "c1": self.c1, "c2": self.c2,
             "c3": self.c3, "c4": self.c4, "c5": self.c5, "c6": self.c6}
        if self.kind == "power":
            d["alpha"] = self.alpha
        return d


def eval_weight(w: WeightSpec, y):
    """Evaluate f(y).  Accepts scalars or arrays; y must be >= 0."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise WeightDomainError("weight argument must be nonnegative")
    if w.kind == "power":
        out = np.power(y_arr, w.alpha) if w.alpha != 0.0 else np.ones_like(y_arr)
    elif w.kind == "log1p":
        out = y_arr + np.log1p(y_arr)
    elif w.kind == "sigmoid_exp":
        # y * e^y / (1 + e^y) = y / (1 + e^-y), stable for large y
        out = y_arr / (1.0 + np.exp(-y_arr))
    else:
        out = w._interp(y_arr)
        if np.any(np.isnan(out)):
            raise WeightDomainError("tabulated weight evaluated outside table range")
    if np.isscalar(y) or np.ndim(y) == 0:
        return float(out)
    return out


def eval_dweight(w: WeightSpec, y):
    """Evaluate f'(y); analytic for built-ins, interpolant derivative for tables."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise WeightDomainError("weight argument must be nonnegative")
    if w.kind == "power":
        if w.alpha == 0.0:
            out = np.zeros_like(y_arr)
        else:
            out = w.alpha * np.power(y_arr, w.alpha - 1.0)
    elif w.kind == "log1p":
        out = 1.0 + 1.0 / (1.0 + y_arr)
    elif w.kind == "sigmoid_exp":
        sig = 1.0 / (1.0 + np.exp(-y_arr))
        out = sig + y_arr * sig * (1.0 - sig)
    else:
        out = w._interp_d(y_arr)
        if np.any(np.isnan(out)):
            raise WeightDomainError("tabulated weight evaluated outside table range")
    if np.isscalar(y) or np.ndim(y) == 0:
        return float(out)
    return out


def dlog_ratio(w: WeightSpec, y):
    """Return y f'(y)/f(y).  For the constant weight this is identically 0."""
    if w.is_constant:
        if np.isscalar(y) or np.ndim(y) == 0:
            return 0.0
        return np.zeros_like(np.asarray(y, dtype=float))
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0):
        raise WeightDomainError("dlog_ratio needs y > 0")
    out = y_arr * eval_dweight(w, y_arr) / eval_weight(w, y_arr)
    if np.isscalar(y) or np.ndim(y) == 0:
        return float(out)
    return out


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    worst_point: tuple
    worst_value: float
    tight_lo: float
    tight_hi: float
    note: str = ""


@dataclass
class AssumptionReport:
    positivity: AssumptionCheck
    log_derivative: AssumptionCheck
    scale_band: AssumptionCheck

    @property
    def all_pass(self) -> bool:
        return (self.positivity.passed and self.log_derivative.passed
                and self.scale_band.passed)

    def as_dict(self) -> dict:
        out = {}
        for key in ("positivity", "log_derivative", "scale_band"):
            c = getattr(self, key)
            out[key] = {"passed": c.passed, "worst_point": list(c.worst_point),
                        "worst_value": c.worst_value,
                        "tight_lo": c.tight_lo, "tight_hi": c.tight_hi,
                        "note": c.note}
        out["all_pass"] = self.all_pass
        return out


def verify_assumptions(w: WeightSpec, y_lo: float, y_hi: float,
                       g_lo: float, g_hi: float, samples: int = 64,
                       slack: float = 1e-9) -> AssumptionReport:
    """Spot-check the three structural assumptions on sampled grids.

    Assumption 1 (positivity) and 2 (log-derivative band) are sampled on
    y in [y_lo, y_hi]; assumption 3 (scale band) on the product grid
    y in [c3, c4] x g in [g_lo, g_hi].  Failures are reported, never raised.
    """
    if not (0 < y_lo < y_hi and 0 < g_lo < g_hi):
        raise ValueError("need 0 < y_lo < y_hi and 0 < g_lo < g_hi")
    if samples < 16:
        raise ValueError("samples must be >= 16")

    ys = np.geomspace(y_lo, y_hi, samples)
    fy = eval_weight(w, ys)

    min_f = float(np.min(fy))
    i_min = int(np.argmin(fy))
    positivity = AssumptionCheck(
        name="f > 0 on (0, inf)",
        passed=bool(min_f > 0.0),
        worst_point=(float(ys[i_min]),),
        worst_value=min_f,
        tight_lo=min_f,
        tight_hi=float(np.max(fy)),
    )

    if w.is_constant:
        log_derivative = AssumptionCheck(
            name="c1 <= y f'/f <= c2",
            passed=True,
            worst_point=(float(ys[0]),),
            worst_value=0.0,
            tight_lo=0.0,
            tight_hi=0.0,
            note="constant-function clause: f' == 0, band check not applicable",
        )
    else:
        ratios = dlog_ratio(w, ys)
        viol = np.maximum(w.c1 - ratios, ratios - w.c2)
        i_worst = int(np.argmax(viol))
        log_derivative = AssumptionCheck(
            name="c1 <= y f'/f <= c2",
            passed=bool(viol[i_worst] <= slack),
            worst_point=(float(ys[i_worst]),),
            worst_value=float(ratios[i_worst]),
            tight_lo=float(np.min(ratios)),
            tight_hi=float(np.max(ratios)),
        )

    yb = np.linspace(w.c3, w.c4, samples)
    gb = np.geomspace(g_lo, g_hi, samples)
    fg = eval_weight(w, gb)
    ratio = eval_weight(w, np.outer(yb, gb)) / fg[None, :]
    viol = np.maximum(w.c5 - ratio, ratio - w.c6)
    iy, ig = np.unravel_index(int(np.argmax(viol)), viol.shape)
    scale_band = AssumptionCheck(
        name="c5 f(g) <= f(y g) <= c6 f(g) for y in [c3, c4]",
        passed=bool(viol[iy, ig] <= slack),
        worst_point=(float(yb[iy]), float(gb[ig])),
        worst_value=float(ratio[iy, ig]),
        tight_lo=float(np.min(ratio)),
        tight_hi=float(np.max(ratio)),
    )

    if w.kind == "tabulated":
        d = eval_dweight(w, ys)
        if np.any(d < 0):
            positivity.note = (positivity.note + " " if positivity.note else "") + \
                "warning: tabulated weight is non-monotone on the sampled range"

    return AssumptionReport(positivity, log_derivative, scale_band)


def weight_from_config(cfg: dict) -> WeightSpec:
    """Build a WeightSpec from a config mapping (see cli module schema)."""
    kind = cfg.get("kind")
    kwargs = {k: float(cfg[k]) for k in ("c1", "c2", "c3", "c4", "c5", "c6") if k in cfg}
    if kind == "power":
        return WeightSpec(kind="power", alpha=float(cfg.get("alpha", 0.0)), **kwargs)
    if kind in ("log1p", "sigmoid_exp"):
        return WeightSpec(kind=kind, **kwargs)
    if kind == "tabulated":
        table = cfg.get("table")
        if not table:
            raise ValueError("tabulated weight needs a 'table' of [y, f] pairs")
        ys, fs = zip(*table)
        return WeightSpec(kind="tabulated", table_y=tuple(map(float, ys)),
                          table_f=tuple(map(float, fs)), **kwargs)
    raise ValueError(f"unknown weight kind {kind!r}")
