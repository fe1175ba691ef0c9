"""Dual numbers for forward-mode differentiation.

``Dual(a, b)`` represents a + b*eps with eps**2 = 0.  Components may themselves
be duals, which gives mixed and second derivatives by nesting (one level per
independent infinitesimal).  The elementary functions are exposed as methods so
numpy's object-dtype ufuncs (``np.exp``, ``np.sqrt``, ``np.log1p`` ...) dispatch
to them, letting field code written against float arrays run unchanged on
arrays of duals.
"""

from __future__ import annotations

import math

import numpy as np


def _call(name: str, v):
    if isinstance(v, Dual):
        return getattr(v, name)()
    return getattr(math, name)(v)


def _unwrap(v):
    """0-d object arrays (from ``arr[..., k]`` indexing) to their element."""
    if isinstance(v, np.ndarray) and v.ndim == 0:
        return v.item()
    return v


def real(v):
    """Innermost real part of a possibly nested dual."""
    v = _unwrap(v)
    while isinstance(v, Dual):
        v = v.a
    return v


class Dual:
    __slots__ = ("a", "b")

    def __init__(self, a, b=0.0):
        self.a = a
        self.b = b

    # arithmetic
    def __add__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        if isinstance(o, Dual):
            return Dual(self.a + o.a, self.b + o.b)
        return Dual(self.a + o, self.b)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        if isinstance(o, Dual):
            return Dual(self.a - o.a, self.b - o.b)
        return Dual(self.a - o, self.b)

    def __rsub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        return Dual(o - self.a, -self.b)

    def __mul__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        if isinstance(o, Dual):
            return Dual(self.a * o.a, self.a * o.b + self.b * o.a)
        return Dual(self.a * o, self.b * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        if isinstance(o, Dual):
            return Dual(self.a / o.a, (self.b * o.a - self.a * o.b) / (o.a * o.a))
        return Dual(self.a / o, self.b / o)

    def __rtruediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        return Dual(o / self.a, -o * self.b / (self.a * self.a))

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if real(self) < 0 else self

    def __pow__(self, k):
        if isinstance(k, np.ndarray):
            return NotImplemented
        if isinstance(k, Dual):
            return (k * self.log()).exp()
        if k == 0:
            return Dual(self.a ** 0, 0.0 * self.b)
        if k == 1:
            return self
        if k == 2:
            return self * self
        return Dual(self.a**k, k * self.a ** (k - 1) * self.b)

    def __rpow__(self, base):
        return (self * _call("log", base)).exp()

    # comparisons act on the real part; used by clamps and branch selection
    def __lt__(self, o):
        return real(self) < real(o)

    def __le__(self, o):
        return real(self) <= real(o)

    def __gt__(self, o):
        return real(self) > real(o)

    def __ge__(self, o):
        return real(self) >= real(o)

    # elementary functions
    def exp(self):
        e = _call("exp", self.a)
        return Dual(e, self.b * e)

    def expm1(self):
        return Dual(_call("expm1", self.a), self.b * _call("exp", self.a))

    def log(self):
        return Dual(_call("log", self.a), self.b / self.a)

    def log1p(self):
        return Dual(_call("log1p", self.a), self.b / (1.0 + self.a))

    def sqrt(self):
        r = _call("sqrt", self.a)
        return Dual(r, self.b / (2.0 * r))

    def sin(self):
        return Dual(_call("sin", self.a), self.b * _call("cos", self.a))

    def cos(self):
        return Dual(_call("cos", self.a), -self.b * _call("sin", self.a))

    def sinh(self):
        return Dual(_call("sinh", self.a), self.b * _call("cosh", self.a))

    def cosh(self):
        return Dual(_call("cosh", self.a), self.b * _call("sinh", self.a))

    def tanh(self):
        t = _call("tanh", self.a)
        return Dual(t, self.b * (1.0 - t * t))

    def arctan(self):
        return Dual(_call("atan", self.a), self.b / (1.0 + self.a * self.a))

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


def derivative(f, x0: float) -> float:
    """f'(x0) for a scalar function written with dual-aware operations."""
    return _part(f(Dual(x0, 1.0)), "b")


def second_derivative(f, x0: float) -> float:
    """f''(x0) via a hyper-dual seed t = x0 + eps1 + eps2."""
    t = Dual(Dual(x0, 1.0), Dual(1.0, 0.0))
    return _part(f(t), "b", "b")


def _part(v, *path):
    v = _unwrap(v)
    for attr in path:
        v = getattr(v, attr) if isinstance(v, Dual) else 0.0
    return v
