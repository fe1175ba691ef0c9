"""Counterexample family for Log^beta-Sobolev inequalities under exp(-alpha N^p).

For t > 0 let r = t^((1-p)/2) and let the center be the dilate delta_t(0, z0),
where (0, z0) is a critical point of N.  The bump

    f_t = clamp((2r - d(p, center)) / r, 0, 1),   d(p, h) = N(h^-1 p),

equals 1 on the quasi-ball of radius r, vanishes outside radius 2r and has
|grad f| <= sup|grad N| / r.  Local integrals are taken by uniform sampling of
the box |x| <= 2r, |z - z_c| <= (2r)^2 / sqrt(a), which contains the support
ball exactly, and every quantity is carried as a logarithm because the masses
are of order exp(-alpha (t N(x0))^p).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

import numpy as np

from .errors import EmptySupportSample, InvalidParameter
from .group import CarnotGroup, Point, dilate
from .measures.profiles import GProfile
from .measures.quadrature import BoltzmannMeasure, estimate_log_z
from .norm import grad_N_batch, grad_N_closed, norm_batch

MIN_ACCEPTED = 100
R_MAX = 2.0 / 3.0


@dataclass(frozen=True)
class NoGoParams:
    p: float
    alpha: float
    q: float
    beta: float
    t_grid: tuple
    z0: tuple

    def __post_init__(self):
        if not self.p >= 1:
            raise InvalidParameter(f"p must be >= 1, got {self.p}")
        if not self.alpha > 0:
            raise InvalidParameter(f"alpha must be positive, got {self.alpha}")
        if not self.q > 1:
            raise InvalidParameter(f"q must exceed 1, got {self.q}")
        if not 0 < self.beta <= 1:
            raise InvalidParameter(f"beta must lie in (0, 1], got {self.beta}")
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise InvalidParameter("t_grid must be an increasing list of at least two positive reals")
        z0 = np.asarray(self.z0, dtype=float)
        if z0.ndim != 1 or abs(float(np.linalg.norm(z0)) - 1.0) > 1e-12:
            raise InvalidParameter("z0 must be a unit vector")
        object.__setattr__(self, "t_grid", tuple(float(v) for v in t))
        object.__setattr__(self, "z0", tuple(float(v) for v in z0))

    @property
    def predicted_slope(self) -> float:
        return self.p * self.beta - self.q * (self.p - 1) / 2.0

    @property
    def in_failure_regime(self) -> bool:
        """q < 2 p beta / (p - 1); always true for p = 1."""
        if self.p == 1:
            return True
        return self.q < 2.0 * self.p * self.beta / (self.p - 1)

    def radius(self, t: float) -> float:
        return float(t) ** ((1.0 - self.p) / 2.0)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "alpha": self.alpha,
            "q": self.q,
            "beta": self.beta,
            "t_grid": list(self.t_grid),
            "z0": list(self.z0),
        }


def base_point(G: CarnotGroup, params: NoGoParams) -> Point:
    """(0, z0), a critical point of N."""
    if len(params.z0) != G.m:
        raise InvalidParameter(f"z0 has length {len(params.z0)}, group has m = {G.m}")
    p0 = Point(np.zeros(G.n), np.asarray(params.z0))
    if np.any(grad_N_closed(G, p0) != 0.0):
        raise InvalidParameter("grad N does not vanish at (0, z0)")
    return p0


def center(G: CarnotGroup, params: NoGoParams, t: float) -> Point:
    return dilate(float(t), base_point(G, params))


def _distances(G: CarnotGroup, c: Point, x, z):
    """(c^-1 p) coordinates and the quasi-distance N(c^-1 p)."""
    dx, dz = G.mul(-c.x, -c.z, np.asarray(x, float), np.asarray(z, float))
    return dx, dz, norm_batch(G, dx, dz)


def bump_values(G: CarnotGroup, params: NoGoParams, t: float, x, z) -> np.ndarray:
    r = params.radius(t)
    _, _, d = _distances(G, center(G, params, t), x, z)
    return np.clip((2.0 * r - d) / r, 0.0, 1.0)


def bump_value(G: CarnotGroup, params: NoGoParams, t: float, point: Point) -> float:
    return float(bump_values(G, params, t, point.x, point.z))


def bump_gradient(G: CarnotGroup, params: NoGoParams, t: float, x, z) -> np.ndarray:
    """-(1/r) (grad N)(c^-1 p) on the ramp r < d < 2r, zero elsewhere."""
    r = params.radius(t)
    dx, dz, d = _distances(G, center(G, params, t), x, z)
    ramp = (d > r) & (d < 2.0 * r)
    return -(ramp / r)[..., None] * grad_N_batch(G, dx, dz)


def _measure_for(G: CarnotGroup, params: NoGoParams, measure: Optional[BoltzmannMeasure]) -> BoltzmannMeasure:
    prof = GProfile.alpha_power(params.p, params.alpha)
    if measure is None:
        return BoltzmannMeasure(G, prof)
    if measure.profile != prof or measure.group != G:
        raise InvalidParameter(f"measure must use alpha_power({params.p}, {params.alpha}) on the same group")
    return measure


def _logmeanexp(v: np.ndarray) -> float:
    top = float(np.max(v))
    if top == -np.inf:
        return -np.inf
    return top + math.log(float(np.mean(np.exp(v - top))))


@dataclass(frozen=True)
class LocalIntegrals:
    """Logs of mu|f|^q, mu(|f|^q |log(|f|^q / mu|f|^q)|^beta) and mu|grad f|^q."""

    t: float
    r: float
    log_mass: float
    log_entropy: float
    log_energy: float
    accepted: int
    log_density_spread: float  # max - min of alpha N^p over the support samples
    plateau_ok: bool
    plateau_points: int

    @property
    def mass(self) -> float:
        return math.exp(self.log_mass)

    @property
    def entropy_lhs(self) -> float:
        return math.exp(self.log_entropy)

    @property
    def energy_rhs(self) -> float:
        return math.exp(self.log_energy)

    @property
    def log_ratio(self) -> float:
        return self.log_entropy - self.log_energy

    @property
    def c2(self) -> float:
        return 0.5 * self.log_density_spread

    def __iter__(self):
        return iter((self.mass, self.entropy_lhs, self.energy_rhs))


def local_integrals(
    G: CarnotGroup,
    measure: Optional[BoltzmannMeasure],
    params: NoGoParams,
    t: float,
    sample_count: int,
    seed,
    log_z: Optional[float] = None,
) -> LocalIntegrals:
    measure = _measure_for(G, params, measure)
    if log_z is None:
        log_z = measure.log_z if measure.log_z is not None else estimate_log_z(measure)
    rng = np.random.default_rng(seed)
    r = params.radius(t)
    c = center(G, params, t)
    hx, hz = 2.0 * r, (2.0 * r) ** 2 / math.sqrt(G.a)
    x = c.x + hx * rng.uniform(-1.0, 1.0, (sample_count, G.n))
    z = c.z + hz * rng.uniform(-1.0, 1.0, (sample_count, G.m))
    log_vol = G.n * math.log(2 * hx) + G.m * math.log(2 * hz)

    dx, dz, d = _distances(G, c, x, z)
    inside = d < 2.0 * r
    accepted = int(inside.sum())
    if accepted < MIN_ACCEPTED:
        raise EmptySupportSample(f"only {accepted} of {sample_count} box samples hit the support at t = {t:g}")

    q, beta = params.q, params.beta
    g = params.alpha * norm_batch(G, x, z) ** params.p
    g_c = params.alpha * norm_batch(G, c.x, c.z) ** params.p
    log_w = -(g - g_c)
    f = np.clip((2.0 * r - d) / r, 0.0, 1.0)
    pos = f > 0
    lf = np.full(sample_count, -np.inf)
    lf[pos] = np.log(f[pos])
    base = log_vol - g_c - log_z

    log_mass = base + _logmeanexp(np.where(pos, q * lf + log_w, -np.inf))
    kern = np.zeros(sample_count)
    kern[pos] = np.abs(q * lf[pos] - log_mass) ** beta
    with np.errstate(divide="ignore"):
        log_entropy = base + _logmeanexp(np.where(pos, q * lf + np.log(kern) + log_w, -np.inf))

    ramp = inside & (d > r)
    gn = grad_N_batch(G, dx[ramp], dz[ramp])
    grad_len = np.sqrt(np.einsum("ij,ij->i", gn, gn)) / r
    lg = np.full(sample_count, -np.inf)
    with np.errstate(divide="ignore"):
        lg[ramp] = q * np.log(grad_len) + log_w[ramp]
    log_energy = base + _logmeanexp(lg)

    plateau = inside & (d <= r)
    plateau_ok = bool(np.all(f[plateau] == 1.0) and np.all(q * lf[plateau] == 0.0))
    spread = float(g[inside].max() - g[inside].min())
    return LocalIntegrals(
        t=float(t),
        r=r,
        log_mass=float(log_mass),
        log_entropy=float(log_entropy),
        log_energy=float(log_energy),
        accepted=accepted,
        log_density_spread=spread,
        plateau_ok=plateau_ok,
        plateau_points=int(plateau.sum()),
    )


def exp_string(log_value: float, digits: int = 12) -> str:
    """Decimal rendering of exp(log_value) that survives float underflow."""
    if log_value == -np.inf:
        return "0"
    v = Decimal(log_value).exp()
    return f"{v:.{digits}e}"


def _slope(t, y) -> float:
    return float(np.polyfit(np.log(t), y, 1)[0])


@dataclass
class NoGoResult:
    params: NoGoParams
    rows: list
    fitted_slope: float
    fitted_slope_full: float
    predicted_slope: float
    in_failure_regime: bool
    log_z: float
    norm_x0: float
    plateau_ok: bool
    max_c2: float
    warnings: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "fitted_slope": self.fitted_slope,
            "fitted_slope_full": self.fitted_slope_full,
            "predicted_slope": self.predicted_slope,
            "in_failure_regime": self.in_failure_regime,
            "log_z": self.log_z,
            "norm_x0": self.norm_x0,
            "plateau_ok": self.plateau_ok,
            "max_c2": self.max_c2,
            "warnings": list(self.warnings),
        }

    def to_dict(self) -> dict:
        d = self.summary()
        d["rows"] = [dict(r) for r in self.rows]
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mass", "entropy", "energy", "ratio"])
        for row in self.rows:
            w.writerow(
                [
                    repr(row["t"]),
                    exp_string(row["log_mass"]),
                    exp_string(row["log_entropy"]),
                    exp_string(row["log_energy"]),
                    repr(row["ratio"]),
                ]
            )
        return buf.getvalue()


def run_nogo(
    G: CarnotGroup,
    measure: Optional[BoltzmannMeasure],
    params: NoGoParams,
    sample_count: int = 100_000,
    seed: int = 0,
) -> NoGoResult:
    """Entropy/energy ratios over the t grid and their log-log slope.

    The headline slope is fitted on the top half of the grid; the full-grid
    slope is reported alongside.  A grid spanning less than one decade is
    accepted with a warning.
    """
    measure = _measure_for(G, params, measure)
    t = np.asarray(params.t_grid)
    radii = t ** ((1.0 - params.p) / 2.0)
    if np.any(radii >= R_MAX):
        bad = float(t[np.argmax(radii >= R_MAX)])
        raise InvalidParameter(f"t = {bad:g} gives r >= 2/3; use larger t")
    warnings = []
    if t[-1] / t[0] < 10.0:
        warnings.append(f"t_grid spans {t[-1] / t[0]:.3g}x, less than one decade")
    log_z = measure.log_z if measure.log_z is not None else estimate_log_z(measure)
    p0 = base_point(G, params)
    rows, locs = [], []
    for i, tv in enumerate(t):
        loc = local_integrals(G, measure, params, float(tv), sample_count, [int(seed), i], log_z)
        locs.append(loc)
        rows.append(
            {
                "t": float(tv),
                "r": loc.r,
                "log_mass": loc.log_mass,
                "log_entropy": loc.log_entropy,
                "log_energy": loc.log_energy,
                "log_ratio": loc.log_ratio,
                "ratio": math.exp(loc.log_ratio),
                "accepted": loc.accepted,
                "c2": loc.c2,
                "plateau_ok": loc.plateau_ok,
            }
        )
    y = np.array([loc.log_ratio for loc in locs])
    half = t.size // 2
    top = slice(half, None) if t.size - half >= 2 else slice(None)
    return NoGoResult(
        params=params,
        rows=rows,
        fitted_slope=_slope(t[top], y[top]),
        fitted_slope_full=_slope(t, y),
        predicted_slope=params.predicted_slope,
        in_failure_regime=params.in_failure_regime,
        log_z=float(log_z),
        norm_x0=float(norm_batch(G, p0.x, p0.z)),
        plateau_ok=all(loc.plateau_ok for loc in locs),
        max_c2=max(loc.c2 for loc in locs),
        warnings=warnings,
    )
