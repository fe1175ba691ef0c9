"""Concave, non-decreasing weights phi for phi-entropies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameter

PHI_KINDS = ("one_plus_pow", "iterated_log")


@dataclass(frozen=True)
class PhiProfile:
    """``one_plus_pow(beta)``: phi(x) = (1 + x)^beta with beta in (0, 1].

    ``iterated_log(depth, alpha)``: h1(x) = log(alpha + x) and
    h_{k+1}(x) = log(alpha + h_k(x)), alpha > 1.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind == "one_plus_pow":
            (beta,) = self.params
            if not 0 < beta <= 1:
                raise InvalidParameter(f"beta must lie in (0, 1], got {beta}")
        elif self.kind == "iterated_log":
            depth, alpha = self.params
            if int(depth) != depth or depth < 1:
                raise InvalidParameter(f"depth must be a positive integer, got {depth}")
            if not alpha > 1:
                raise InvalidParameter(f"alpha must exceed 1, got {alpha}")
            object.__setattr__(self, "params", (int(depth), float(alpha)))
        else:
            raise InvalidParameter(f"unknown phi kind {self.kind!r}")

    @classmethod
    def one_plus_pow(cls, beta: float) -> "PhiProfile":
        return cls("one_plus_pow", (float(beta),))

    @classmethod
    def iterated_log(cls, depth: int, alpha: float) -> "PhiProfile":
        return cls("iterated_log", (depth, alpha))

    @property
    def label(self) -> str:
        return f"{self.kind}({', '.join(f'{v:g}' for v in self.params)})"

    def to_dict(self) -> dict:
        if self.kind == "one_plus_pow":
            return {"kind": self.kind, "beta": self.params[0]}
        return {"kind": self.kind, "depth": self.params[0], "alpha": self.params[1]}

    def derivatives(self, x):
        """(phi, phi', phi'') at x >= 0."""
        x = np.asarray(x, dtype=float)
        if self.kind == "one_plus_pow":
            (beta,) = self.params
            u = 1.0 + x
            return u**beta, beta * u ** (beta - 1), beta * (beta - 1) * u ** (beta - 2)
        depth, alpha = self.params
        h, h1, h2 = x, np.ones_like(x), np.zeros_like(x)
        for _ in range(depth):
            u = alpha + h
            h, h1, h2 = np.log(u), h1 / u, h2 / u - h1 * h1 / (u * u)
        return h, h1, h2

    def __call__(self, x):
        return self.derivatives(x)[0]

    def d1(self, x):
        return self.derivatives(x)[1]

    def d2(self, x):
        return self.derivatives(x)[2]


def phi_from_dict(d: dict) -> PhiProfile:
    if d.get("kind") == "one_plus_pow":
        return PhiProfile.one_plus_pow(d["beta"])
    if d.get("kind") == "iterated_log":
        return PhiProfile.iterated_log(d["depth"], d["alpha"])
    raise InvalidParameter(f"cannot build phi profile from {d!r}")
