"""Growth-condition checkers for radial potentials.

Each check evaluates the relevant inequality on a log-spaced grid over
[1, 10^3] (the general path, used for custom profiles) and, for built-in
kinds, also applies the exact closed-form verdict, which takes precedence.
All comparisons are done on logarithms so that cosh-type profiles do not
overflow.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidParameter
from .profiles import GProfile

GRID_LO, GRID_HI, GRID_POINTS = 1.0, 1e3, 200
SLOPE_TOL = 1e-9


def default_grid(points: int = GRID_POINTS, lo: float = GRID_LO, hi: float = GRID_HI) -> np.ndarray:
    return np.geomspace(lo, hi, points)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < GRID_POINTS or grid.min() > GRID_LO or grid.max() < GRID_HI:
        raise InvalidParameter(f"condition grid must cover [{GRID_LO}, {GRID_HI}] with >= {GRID_POINTS} points")
    return grid


def last_decade_slope(s: np.ndarray, log_values: np.ndarray) -> float:
    """Least-squares slope of log value against log s over the top decade of the grid."""
    sel = s >= s.max() / 10.0
    ls = np.log(s[sel])
    lv = log_values[sel]
    if not np.all(np.isfinite(lv)):
        return np.inf if np.any(lv == np.inf) else -np.inf
    return float(np.polyfit(ls, lv, 1)[0])


@dataclass
class Witness:
    s: float
    margin: float  # log(rhs) - log(lhs); negative means violated

    def to_dict(self):
        return asdict(self)


@dataclass
class CheckResult:
    ok: bool
    grid_ok: bool
    closed_form: Optional[bool]
    witness: Optional[Witness] = None
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def check_theorem1_condition(profile: GProfile, grid=None) -> CheckResult:
    """g''(s) <= g'(s)^3 s^3 for s >= 1."""
    s = _check_grid(default_grid() if grid is None else grid)
    lhs = profile.log_d2(s)
    rhs = 3.0 * profile.log_d1(s) + 3.0 * np.log(s)
    with np.errstate(invalid="ignore"):
        margin = np.where(lhs == -np.inf, np.inf, rhs - lhs)
    i = int(np.argmin(margin))
    grid_ok = bool(np.all(margin >= -1e-12))
    closed = None
    if profile.kind in ("power", "cosh_power", "power_log"):
        closed = True
    elif profile.kind == "alpha_power":
        p, alpha = profile.params
        # both sides are monotone in s >= 1, so s = 1 is the binding point
        closed = bool(p - 1 <= alpha * alpha * p * p)
    ok = grid_ok if closed is None else closed
    return CheckResult(ok, grid_ok, closed, Witness(float(s[i]), float(margin[i])))


def check_eta_unbounded(profile: GProfile, grid=None) -> CheckResult:
    """eta = g'(s)/s^2 tends to infinity (its last-decade log-log slope is positive)."""
    s = _check_grid(default_grid() if grid is None else grid)
    log_eta = profile.log_d1(s) - 2.0 * np.log(s)
    slope = last_decade_slope(s, log_eta)
    grid_ok = bool(slope > SLOPE_TOL)
    closed = None
    if profile.kind == "power":
        closed = profile.params[0] > 3
    elif profile.kind == "alpha_power":
        closed = profile.params[0] > 3
    elif profile.kind == "power_log":
        closed = profile.params[0] >= 3
    elif profile.kind == "cosh_power":
        closed = True
    ok = grid_ok if closed is None else bool(closed)
    return CheckResult(ok, grid_ok, closed, Witness(float(s[-1]), float(log_eta[-1])), {"last_decade_slope": slope})


def _sup_bounded(s, log_h, tol=SLOPE_TOL):
    """Finite on the grid and non-increasing on the last decade."""
    finite = bool(np.all(np.isfinite(log_h[log_h != -np.inf])))
    slope = last_decade_slope(s, log_h)
    i = int(np.argmax(log_h))
    return finite and slope <= tol, slope, float(s[i]), float(log_h[i])


@dataclass
class ConditionReport:
    beta: float
    theorem1_ok: bool
    eta_unbounded: bool
    t11_gprime_increasing: bool
    t11_g_power_bound: bool
    t11_gpp_bound: bool
    c_candidate: float
    d_candidate: float
    witnesses: dict = field(default_factory=dict)
    grid_verdicts: dict = field(default_factory=dict)

    @property
    def theorem11_ok(self) -> bool:
        return self.t11_gprime_increasing and self.t11_g_power_bound and self.t11_gpp_bound

    def to_dict(self) -> dict:
        d = asdict(self)
        d["theorem11_ok"] = self.theorem11_ok
        return d


def check_theorem11_conditions(profile: GProfile, beta: float, grid=None) -> ConditionReport:
    """The three growth hypotheses of the Log^beta-Sobolev theorem, plus the
    Theorem 1 and eta checks so one report carries every verdict.

    * g' increasing: g'' >= 0 on the grid;
    * power bound: g(s) (s^2/g'(s))^(1/beta) stays bounded (last-decade slope <= 0);
      the reported ``c_candidate`` is the grid sup of g^beta s^2/g';
    * g'' < d g'^2: g''/g'^2 bounded, ``d_candidate`` its grid sup.
    """
    if not 0 < beta <= 1:
        raise InvalidParameter(f"beta must lie in (0, 1], got {beta}")
    s = _check_grid(default_grid() if grid is None else grid)
    log_s = np.log(s)
    log_g = profile.log_g(s)
    log_d1 = profile.log_d1(s)
    log_d2 = profile.log_d2(s)

    d2 = profile.d2(s)
    inc_grid = bool(np.all((d2 >= 0) | (log_d2 > -np.inf)))
    log_h = log_g + (2.0 * log_s - log_d1) / beta
    pb_grid, pb_slope, pb_s, pb_val = _sup_bounded(s, log_h)
    log_r = log_d2 - 2.0 * log_d1
    gpp_grid, gpp_slope, gpp_s, gpp_val = _sup_bounded(s, log_r)

    inc, pb, gpp = inc_grid, pb_grid, gpp_grid
    kind = profile.kind
    if kind in ("power", "alpha_power"):
        p = profile.params[0]
        inc = True
        pb = bool(beta * p <= p - 3 + 1e-12)
        gpp = True
    elif kind in ("cosh_power", "power_log"):
        inc = True

    t1 = check_theorem1_condition(profile, s)
    eta = check_eta_unbounded(profile, s)
    return ConditionReport(
        beta=float(beta),
        theorem1_ok=t1.ok,
        eta_unbounded=eta.ok,
        t11_gprime_increasing=inc,
        t11_g_power_bound=pb,
        t11_gpp_bound=gpp,
        c_candidate=float(np.exp(beta * np.max(log_h))),
        d_candidate=float(np.exp(np.max(log_r))),
        witnesses={
            "theorem1": t1.witness.to_dict(),
            "g_power_bound": {"s": pb_s, "log_value": pb_val, "last_decade_slope": pb_slope},
            "gpp_bound": {"s": gpp_s, "log_value": gpp_val, "last_decade_slope": gpp_slope},
            "eta": {"last_decade_slope": eta.detail["last_decade_slope"]},
        },
        grid_verdicts={
            "theorem1_ok": t1.grid_ok,
            "eta_unbounded": eta.grid_ok,
            "t11_gprime_increasing": inc_grid,
            "t11_g_power_bound": pb_grid,
            "t11_gpp_bound": gpp_grid,
        },
    )
