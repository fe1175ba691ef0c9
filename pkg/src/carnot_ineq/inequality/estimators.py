"""Monte-Carlo functionals over a chain.

Each public estimator averages a per-state quantity over ``chain.x`` and
``chain.z`` (any object with those arrays works).  The ``_weighted`` helpers
take the per-state arrays plus optional probability weights and are shared
with the bootstrap, which reweights states instead of copying them.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import DegenerateFunction, InvalidParameter, SupportViolation
from ..group import CarnotGroup
from ..hcalculus import horizontal_gradient_batch
from ..norm import norm_batch
from .functions import as_field
from .phi import PhiProfile

ZERO_MASS = 1e-300
SUPPORT_TOL = 1e-12


def _check_q(q: float) -> float:
    if not q >= 1:
        raise InvalidParameter(f"q must be >= 1, got {q}")
    return float(q)


def _mean(v: np.ndarray, w: Optional[np.ndarray]) -> float:
    return float(v.mean()) if w is None else float(np.dot(w, v))


def _xz(chain):
    return np.asarray(chain.x, float), np.asarray(chain.z, float)


def _norms(chain, G: CarnotGroup):
    norms = getattr(chain, "norms", None)
    if norms is not None:
        return np.asarray(norms, float)
    return norm_batch(G, *_xz(chain))


# per-state quantities


def f_values(chain, f) -> np.ndarray:
    return as_field(f).values(*_xz(chain))


def grad_norm_q(chain, G: CarnotGroup, f, q: float) -> np.ndarray:
    """|grad f|^q per state, |.| the Euclidean length of the n-vector."""
    g = horizontal_gradient_batch(G, as_field(f), *_xz(chain))
    return np.sqrt(np.einsum("ij,ij->i", g, g)) ** q


def eta_values(chain, measure) -> np.ndarray:
    """g'(N)/N^2 per state (0 where N = 0, where the cutoff kills it anyway)."""
    N = _norms(chain, measure.group)
    out = np.zeros_like(N)
    pos = N > 0
    out[pos] = measure.profile.d1(N[pos]) / (N[pos] * N[pos])
    return out


# weighted kernels


def lq_dev_weighted(fv: np.ndarray, q: float, w: Optional[np.ndarray] = None) -> float:
    mu_f = _mean(fv, w)
    return _mean(np.abs(fv - mu_f) ** q, w)


def entropy_parts(fv: np.ndarray, q: float):
    """(|f|^q, q log|f|, live mask) reused across reweightings."""
    afq = np.abs(fv) ** q
    live = afq >= ZERO_MASS
    qlog = np.zeros_like(afq)
    qlog[live] = q * np.log(np.abs(fv[live]))
    return afq, qlog, live


def entropy_from_parts(parts, kernel, w: Optional[np.ndarray] = None) -> float:
    afq, qlog, live = parts
    mass = _mean(afq, w)
    if not mass >= ZERO_MASS:
        raise DegenerateFunction(f"mu|f|^q = {mass:.3g} is below {ZERO_MASS:g}")
    summand = np.zeros_like(afq)
    summand[live] = afq[live] * kernel(np.abs(qlog[live] - np.log(mass)))
    return _mean(summand, w)


def entropy_weighted(fv: np.ndarray, q: float, kernel, w: Optional[np.ndarray] = None) -> float:
    return entropy_from_parts(entropy_parts(fv, q), kernel, w)


# public estimators


def lq_mean_deviation(chain, f, q: float) -> float:
    """mu|f - mu f|^q."""
    return lq_dev_weighted(f_values(chain, f), _check_q(q))


def energy(chain, G: CarnotGroup, f, q: float) -> float:
    """mu|grad f|^q."""
    return float(grad_norm_q(chain, G, f, _check_q(q)).mean())


def mass(chain, f, q: float) -> float:
    """mu|f|^q."""
    return float((np.abs(f_values(chain, f)) ** _check_q(q)).mean())


def check_support(chain, G: CarnotGroup, fv: np.ndarray) -> None:
    N = _norms(chain, G)
    bad = (N < 1.0) & (np.abs(fv) > SUPPORT_TOL)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise SupportViolation(f"f = {fv[i]:.3g} at N = {N[i]:.3g} < 1; apply the exterior cutoff first")


def ubound_lhs(chain, measure, f, q: float) -> float:
    """mu(g'(N)/N^2 |f|^q) for f supported in {N >= 1}."""
    q = _check_q(q)
    fv = f_values(chain, f)
    check_support(chain, measure.group, fv)
    return float((eta_values(chain, measure) * np.abs(fv) ** q).mean())


def phi_entropy(chain, f, q: float, phi: PhiProfile) -> float:
    """mu(|f|^q phi(|log(|f|^q / mu|f|^q)|)); negligible states contribute 0."""
    return entropy_weighted(f_values(chain, f), _check_q(q), phi)


def beta_kernel(beta: float):
    if not 0 < beta <= 1:
        raise InvalidParameter(f"beta must lie in (0, 1], got {beta}")
    return lambda t: t**beta


def beta_entropy(chain, f, q: float, beta: float) -> float:
    """mu(|f|^q |log(|f|^q / mu|f|^q)|^beta)."""
    return entropy_weighted(f_values(chain, f), _check_q(q), beta_kernel(beta))
