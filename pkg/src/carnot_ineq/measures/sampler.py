"""Random-walk Metropolis for Boltzmann measures exp(-g(N)) / Z.

Proposals add step * xi_x to x and step^2 * xi_z to z (anisotropic, matching
the dilation weights) or step * xi_z (isotropic fallback).  The step is tuned
on the first count // 5 iterations in batches of 100 and frozen afterwards.
All randomness is drawn up front from ``numpy.random.default_rng(seed)``, so a
chain is a pure function of its arguments and both kernel backends produce
the same trajectory.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import _kernels
from ..errors import AdaptationFailed, InvalidParameter
from ..group import Point
from ..norm import norm_batch
from .quadrature import BoltzmannMeasure

MIN_COUNT = 10_000
BATCH = 100
TARGET_ACCEPT = (0.23, 0.40)
VALID_ACCEPT = (0.1, 0.6)
PROPOSALS = ("anisotropic", "isotropic")


def integrated_autocorr_time(series) -> float:
    """Geyer initial-positive-sequence estimate of the integrated autocorrelation time."""
    y = np.asarray(series, dtype=float)
    n = y.size
    if n < 4:
        return 1.0
    y = y - y.mean()
    var = float(np.dot(y, y)) / n
    if var <= 0.0:
        return 1.0
    size = 1 << int(2 * n - 1).bit_length()
    f = np.fft.rfft(y, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n] / n
    rho = acov / acov[0]
    pairs = rho[: 2 * (n // 2)].reshape(-1, 2).sum(axis=1)
    nonpos = np.nonzero(pairs <= 0.0)[0]
    k = int(nonpos[0]) if nonpos.size else pairs.size
    gam = np.minimum.accumulate(pairs[:k]) if k else pairs[:0]
    tau = -1.0 + 2.0 * float(gam.sum())
    return max(tau, 1.0 / n)


def effective_sample_size(series) -> float:
    y = np.asarray(series, dtype=float)
    return float(y.size / integrated_autocorr_time(y))


@dataclass(frozen=True, eq=False)
class Chain:
    """Post-burn-in states of one Metropolis run."""

    x: np.ndarray
    z: np.ndarray
    norms: np.ndarray
    acceptance_rate: float
    ess: float
    seed: int
    burn_in: int
    step: float
    proposal: str = "anisotropic"
    backend: str = "python"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.x, self.z, self.norms):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def points(self) -> list[Point]:
        return [Point(self.x[i], self.z[i]) for i in range(len(self))]

    @property
    def ess_ok(self) -> bool:
        return self.ess >= 0.01 * len(self)

    def mean_se(self, values) -> tuple[float, float]:
        """Mean of a per-state observable and its autocorrelation-aware standard error."""
        v = np.asarray(values, dtype=float)
        if v.shape != (len(self),):
            raise InvalidParameter("observable must have one value per state")
        tau = integrated_autocorr_time(v)
        return float(v.mean()), float(v.std() * math.sqrt(tau / v.size))

    def moments(self) -> dict:
        """E[N], E[N^2], E[|x|^2] with standard errors."""
        out = {}
        for key, vals in (
            ("E_N", self.norms),
            ("E_N2", self.norms**2),
            ("E_x2", np.einsum("ij,ij->i", self.x, self.x)),
        ):
            mean, se = self.mean_se(vals)
            out[key] = mean
            out[key + "_se"] = se
        return out

    def summary(self) -> dict:
        return {
            "length": len(self),
            "acceptance_rate": self.acceptance_rate,
            "ess": self.ess,
            "seed": self.seed,
            "burn_in": self.burn_in,
            "step": self.step,
            "proposal": self.proposal,
            "backend": self.backend,
        }

    def to_csv(self, path) -> None:
        n, m = self.x.shape[1], self.z.shape[1]
        header = ["idx"] + [f"x{i + 1}" for i in range(n)] + [f"z{k + 1}" for k in range(m)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i in range(len(self)):
                w.writerow([i] + [repr(float(v)) for v in self.x[i]] + [repr(float(v)) for v in self.z[i]])


def _callable_segment(g, x0, z0, noise, log_u, step, zstep, a, record):
    """Generic segment for profiles without a compiled code."""
    n = x0.size
    x, z = x0.copy(), z0.copy()
    rows = log_u.size if record else 0
    xs, zs = np.empty((rows, n)), np.empty((rows, z0.size))

    def gval(xv, zv):
        rx = float(np.dot(xv, xv))
        return float(g(np.sqrt(np.sqrt(rx * rx + a * float(np.dot(zv, zv))))))

    g_cur = gval(x, z)
    accepted = 0
    for t in range(log_u.size):
        xp = x + step * noise[t, :n]
        zp = z + zstep * noise[t, n:]
        g_new = gval(xp, zp)
        if log_u[t] < g_cur - g_new:
            x, z, g_cur = xp, zp, g_new
            accepted += 1
        if record:
            xs[t], zs[t] = x, z
    return xs, zs, accepted, x, z


def _segment_runner(measure: BoltzmannMeasure, backend: Optional[str]):
    prof = measure.profile
    a = measure.group.a
    code = _kernels.PROFILE_CODES.get(prof.kind)
    if code is None:
        def run(x0, z0, noise, log_u, step, zstep, record):
            return _callable_segment(prof.g, x0, z0, noise, log_u, step, zstep, a, record)

        return run, "python"
    mod = _kernels.get_backend(backend)
    p0 = prof.params[0]
    p1 = prof.params[1] if len(prof.params) > 1 else 1.0

    def run(x0, z0, noise, log_u, step, zstep, record):
        return mod.run_segment(
            np.ascontiguousarray(x0, dtype=float),
            np.ascontiguousarray(z0, dtype=float),
            np.ascontiguousarray(noise, dtype=float),
            np.ascontiguousarray(log_u, dtype=float),
            float(step), float(zstep), float(a), int(code), float(p0), float(p1), bool(record),
        )

    return run, ("cython" if mod is not _kernels._metropolis_py else "python")


def _zstep(step: float, proposal: str) -> float:
    return step * step if proposal == "anisotropic" else step


def mcmc_sample(
    measure: BoltzmannMeasure,
    count: int,
    seed: int,
    step0: float = 0.5,
    proposal: str = "anisotropic",
    backend: Optional[str] = None,
    min_count: int = MIN_COUNT,
) -> Chain:
    """Run count // 5 adaptation steps, then record ``count`` states."""
    if count < min_count:
        raise InvalidParameter(f"count must be >= {min_count}, got {count}")
    if not step0 > 0:
        raise InvalidParameter(f"step0 must be positive, got {step0}")
    if proposal not in PROPOSALS:
        raise InvalidParameter(f"proposal must be one of {PROPOSALS}")
    G = measure.group
    n, m = G.n, G.m
    rng = np.random.default_rng(seed)
    run, used = _segment_runner(measure, backend)

    x, z = np.zeros(n), np.zeros(m)
    log_step = math.log(step0)
    burn_in = count // 5
    target = 0.5 * sum(TARGET_ACCEPT)
    n_batches = max(burn_in // BATCH, 1)
    for b in range(n_batches):
        noise = rng.standard_normal((BATCH, n + m))
        log_u = np.log(rng.random(BATCH))
        step = math.exp(log_step)
        _, _, acc, x, z = run(x, z, noise, log_u, step, _zstep(step, proposal), False)
        log_step += 2.0 * (acc / BATCH - target) / math.sqrt(b + 1)

    step = math.exp(log_step)
    noise = rng.standard_normal((count, n + m))
    log_u = np.log(rng.random(count))
    xs, zs, acc, _, _ = run(x, z, noise, log_u, step, _zstep(step, proposal), True)
    rate = acc / count
    if not VALID_ACCEPT[0] <= rate <= VALID_ACCEPT[1]:
        raise AdaptationFailed(f"acceptance {rate:.3f} outside {VALID_ACCEPT} after burn-in (step {step:.3g})")
    norms = norm_batch(G, xs, zs)
    return Chain(
        x=xs,
        z=zs,
        norms=norms,
        acceptance_rate=rate,
        ess=effective_sample_size(norms),
        seed=int(seed),
        burn_in=burn_in,
        step=step,
        proposal=proposal,
        backend=used,
    )


def metropolis_step_batch(measure: BoltzmannMeasure, x, z, step: float, rng, proposal: str = "anisotropic"):
    """One Metropolis transition applied independently to each row of (x, z)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    xp = x + step * rng.standard_normal(x.shape)
    zp = z + _zstep(step, proposal) * rng.standard_normal(z.shape)
    log_ratio = measure.log_density(xp, zp) - measure.log_density(x, z)
    accept = np.log(rng.random(x.shape[0])) < log_ratio
    return np.where(accept[:, None], xp, x), np.where(accept[:, None], zp, z), accept
