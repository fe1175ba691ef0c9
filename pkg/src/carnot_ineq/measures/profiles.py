"""Radial potentials g for Boltzmann measures exp(-g(N)) / Z."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import InvalidParameter

KINDS = ("power", "cosh_power", "power_log", "alpha_power", "custom")

_LOG2 = np.log(2.0)


def _pow(s, k):
    """s**k with 0**k -> 0 for k > 0 and 0**0 -> 1, no warnings."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.power(s, k)
    if k > 0:
        out = np.where(s == 0, 0.0, out)
    elif k == 0:
        out = np.ones_like(s)
    return out


def _log_sinh(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(u > 20, u - _LOG2, np.log(np.sinh(np.minimum(u, 20.0))))


def _log_cosh(u):
    u = np.asarray(u, dtype=float)
    return u + np.log1p(np.exp(-2.0 * u)) - _LOG2


@dataclass(frozen=True)
class GProfile:
    """g together with g' and g''.

    Built-in kinds: ``power(k)`` g = s^k; ``cosh_power(k)`` g = cosh(s^k);
    ``power_log(k)`` g = s^k log(1 + s); ``alpha_power(p, alpha)`` g = alpha s^p.
    ``custom`` takes user callables and is only handled by the general grid
    code paths.
    """

    kind: str
    params: tuple = ()
    funcs: Optional[tuple[Callable, Callable, Callable]] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown profile kind {self.kind!r}")
        if self.kind in ("power", "cosh_power", "power_log"):
            if len(self.params) != 1 or not self.params[0] >= 1:
                raise InvalidParameter(f"{self.kind} needs one exponent k >= 1, got {self.params}")
        elif self.kind == "alpha_power":
            if len(self.params) != 2 or not (self.params[0] >= 1 and self.params[1] > 0):
                raise InvalidParameter(f"alpha_power needs p >= 1 and alpha > 0, got {self.params}")
        elif self.funcs is None:
            raise InvalidParameter("custom profile needs (g, g', g'') callables")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))

    # constructors
    @classmethod
    def power(cls, k: float) -> "GProfile":
        return cls("power", (k,))

    @classmethod
    def cosh_power(cls, k: float) -> "GProfile":
        return cls("cosh_power", (k,))

    @classmethod
    def power_log(cls, k: float) -> "GProfile":
        return cls("power_log", (k,))

    @classmethod
    def alpha_power(cls, p: float, alpha: float = 1.0) -> "GProfile":
        return cls("alpha_power", (p, alpha))

    @classmethod
    def custom(cls, g, d1, d2, name: str = "custom") -> "GProfile":
        return cls("custom", (), (g, d1, d2), name)

    @property
    def label(self) -> str:
        if self.kind == "custom":
            return self.name
        return f"{self.kind}({', '.join(f'{v:g}' for v in self.params)})"

    def to_dict(self) -> dict:
        if self.kind == "alpha_power":
            return {"kind": self.kind, "p": self.params[0], "alpha": self.params[1]}
        if self.kind == "custom":
            return {"kind": "custom", "name": self.name}
        return {"kind": self.kind, "k": self.params[0]}

    # values
    def g(self, s):
        s = np.asarray(s, dtype=float)
        kind = self.kind
        if kind == "power":
            return _pow(s, self.params[0])
        if kind == "cosh_power":
            with np.errstate(over="ignore"):  # inf is the right answer
                return np.cosh(_pow(s, self.params[0]))
        if kind == "power_log":
            return _pow(s, self.params[0]) * np.log1p(s)
        if kind == "alpha_power":
            p, alpha = self.params
            return alpha * _pow(s, p)
        return np.asarray(self.funcs[0](s), dtype=float)

    def d1(self, s):
        s = np.asarray(s, dtype=float)
        kind = self.kind
        if kind == "power":
            k = self.params[0]
            return k * _pow(s, k - 1)
        if kind == "cosh_power":
            k = self.params[0]
            with np.errstate(over="ignore", invalid="ignore"):
                return k * _pow(s, k - 1) * np.sinh(_pow(s, k))
        if kind == "power_log":
            k = self.params[0]
            return k * _pow(s, k - 1) * np.log1p(s) + _pow(s, k) / (s + 1.0)
        if kind == "alpha_power":
            p, alpha = self.params
            return alpha * p * _pow(s, p - 1)
        return np.asarray(self.funcs[1](s), dtype=float)

    def d2(self, s):
        s = np.asarray(s, dtype=float)
        kind = self.kind
        if kind == "power":
            k = self.params[0]
            return k * (k - 1) * _pow(s, k - 2) if k != 1 else np.zeros_like(s)
        if kind == "cosh_power":
            k = self.params[0]
            u = _pow(s, k)
            with np.errstate(over="ignore", invalid="ignore"):
                first = k * (k - 1) * _pow(s, k - 2) * np.sinh(u) if k != 1 else 0.0
                return first + k * k * _pow(s, 2 * k - 2) * np.cosh(u)
        if kind == "power_log":
            k = self.params[0]
            first = k * (k - 1) * _pow(s, k - 2) * np.log1p(s) if k != 1 else 0.0
            return first + 2 * k * _pow(s, k - 1) / (s + 1.0) - _pow(s, k) / (s + 1.0) ** 2
        if kind == "alpha_power":
            p, alpha = self.params
            return alpha * p * (p - 1) * _pow(s, p - 2) if p != 1 else np.zeros_like(s)
        return np.asarray(self.funcs[2](s), dtype=float)

    # logs for overflow-free comparisons on large grids (s > 0 only)
    def log_d1(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cosh_power":
            k = self.params[0]
            return np.log(k) + (k - 1) * np.log(s) + _log_sinh(s**k)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.d1(s))

    def log_d2(self, s):
        """log g''; -inf where g'' <= 0."""
        s = np.asarray(s, dtype=float)
        if self.kind == "cosh_power":
            k = self.params[0]
            u = s**k
            a = np.log(k * k) + (2 * k - 2) * np.log(s) + _log_cosh(u)
            if k == 1:
                return a
            b = np.log(k * (k - 1)) + (k - 2) * np.log(s) + _log_sinh(u)
            return np.logaddexp(a, b)
        d2 = self.d2(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(d2 > 0, np.log(np.where(d2 > 0, d2, 1.0)), -np.inf)

    def log_g(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cosh_power":
            return _log_cosh(s ** self.params[0])
        with np.errstate(divide="ignore"):
            return np.log(self.g(s))

    def eta(self, s):
        """g'(s)/s^2, the weight in the U-bound."""
        s = np.asarray(s, dtype=float)
        return self.d1(s) / (s * s)


def profile_from_dict(d: dict) -> GProfile:
    kind = d.get("kind")
    if kind == "alpha_power":
        return GProfile.alpha_power(d["p"], d.get("alpha", 1.0))
    if kind in ("power", "cosh_power", "power_log"):
        return GProfile(kind, (d["k"],))
    raise InvalidParameter(f"cannot build profile from {d!r}")


def g_eval(profile: GProfile, s):
    return profile.g(_nonneg(s))


def g_d1(profile: GProfile, s):
    return profile.d1(_nonneg(s))


def g_d2(profile: GProfile, s):
    return profile.d2(_nonneg(s))


def _nonneg(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise InvalidParameter("profile argument must be nonnegative")
    return s
