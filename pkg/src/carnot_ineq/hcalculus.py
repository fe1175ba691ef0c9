"""Left-invariant horizontal calculus.

X_i = d/dx_i + 1/2 sum_{k,l} L^k_{il} x_l d/dz_k is the derivative along the
one-parameter curve t -> p o (t e_i, 0).  In exponential coordinates that curve
is the straight line p + t v_i(p) with v_i(p) = (e_i, 1/2 (L^k x)_i), and v_i
does not change along it (L^k_{ii} = 0).  So X_i f(p) and X_i^2 f(p) are the
first and second derivatives of a scalar function of t, which is how every
backend below computes them.

Fields are written against coordinate arrays ``fn(x, z)`` that broadcast over
leading axes; the same code then evaluates batches of float points and single
points with dual-number coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .dual import Dual, _part
from .errors import IndexOutOfRange, InvalidParameter
from .group import CarnotGroup, Point

MODES = ("analytic", "dual_number", "central_difference")
FD_REL_STEP = 1e-5


@dataclass(frozen=True)
class ScalarField:
    """A scalar function on the group.

    ``fn(x, z)`` evaluates the field; ``grad(x, z)`` (optional) returns the
    horizontal gradient with shape ``(..., n)`` and ``laplacian(x, z)``
    (optional) the sub-Laplacian.  ``mode`` picks the default backend.
    """

    fn: Callable
    grad: Optional[Callable] = None
    laplacian: Optional[Callable] = None
    mode: str = "dual_number"
    name: str = "f"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidParameter(f"unknown differentiation mode {self.mode!r}")

    def __call__(self, p: Point):
        return self.fn(p.x, p.z)

    def values(self, x, z) -> np.ndarray:
        return np.asarray(self.fn(x, z), dtype=float)

    def with_mode(self, mode: str) -> "ScalarField":
        return replace(self, mode=mode)


def field(fn, grad=None, laplacian=None, name="f", mode=None) -> ScalarField:
    """Build a field, defaulting to analytic mode when a gradient is supplied."""
    if mode is None:
        mode = "analytic" if grad is not None else "dual_number"
    return ScalarField(fn, grad, laplacian, mode, name)


@dataclass(frozen=True)
class LeftJacobian:
    matrix: np.ndarray

    def check(self, n: int, tol: float = 0.0) -> bool:
        M = self.matrix
        return bool(
            np.max(np.abs(M[:n, :n] - np.eye(n)), initial=0.0) <= tol
            and np.max(np.abs(M[:n, n:]), initial=0.0) <= tol
            and np.max(np.abs(M[n:, n:] - np.eye(M.shape[0] - n)), initial=0.0) <= tol
        )


def _z_coefficients(G: CarnotGroup, x) -> np.ndarray:
    """c[..., i, k] = 1/2 sum_l L^k_{il} x_l, the d/dz_k coefficient of X_i."""
    return 0.5 * np.einsum("kil,...l->...ik", G.lambdas, x)


def left_jacobian(G: CarnotGroup, p: Point) -> LeftJacobian:
    n, m = G.n, G.m
    J = np.eye(n + m)
    J[n:, :n] = _z_coefficients(G, p.x).T
    return LeftJacobian(J)


def _direction(G: CarnotGroup, i: int, x):
    vx = np.zeros(G.n)
    vx[i] = 1.0
    return vx, _z_coefficients(G, x)[..., i, :]


def _check_index(G: CarnotGroup, i: int) -> int:
    if not (isinstance(i, (int, np.integer)) and 1 <= i <= G.n):
        raise IndexOutOfRange(f"vector field index must be in 1..{G.n}, got {i}")
    return int(i) - 1


def fd_step(p: Point, h: Optional[float] = None) -> float:
    """Central-difference step h = 1e-5 * max(1, |p|) unless overridden."""
    if h is not None:
        return h
    return FD_REL_STEP * max(1.0, float(np.linalg.norm(np.concatenate([p.x, p.z]))))


def _line(f: ScalarField, p: Point, vx, vz):
    return lambda t: f.fn(p.x + t * vx, p.z + t * vz)


def xi_apply(G: CarnotGroup, i: int, f: ScalarField, p: Point, mode: Optional[str] = None, h=None) -> float:
    """X_i f(p) with ``i`` in 1..n."""
    k = _check_index(G, i)
    mode = mode or f.mode
    if mode == "analytic" and f.grad is not None:
        return float(np.asarray(f.grad(p.x, p.z))[k])
    vx, vz = _direction(G, k, p.x)
    if mode == "central_difference":
        step = fd_step(p, h)
        g = _line(f, p, vx, vz)
        return float((g(step) - g(-step)) / (2.0 * step))
    x = p.x + Dual(0.0, 1.0) * vx
    z = p.z + Dual(0.0, 1.0) * vz
    return float(_part(f.fn(x, z), "b"))


def sub_gradient(G: CarnotGroup, f: ScalarField, p: Point, mode: Optional[str] = None, h=None) -> np.ndarray:
    mode = mode or f.mode
    if mode == "analytic" and f.grad is not None:
        return np.asarray(f.grad(p.x, p.z), dtype=float)
    return np.array([xi_apply(G, i, f, p, mode, h) for i in range(1, G.n + 1)])


def xi_xj_apply(G: CarnotGroup, i: int, j: int, f: ScalarField, p: Point, mode: Optional[str] = None, h=None) -> float:
    """X_i X_j f(p): mixed derivative of f(p o (s e_i) o (t e_j)) at s = t = 0."""
    a, b = _check_index(G, i), _check_index(G, j)
    mode = mode or f.mode
    ea = np.zeros(G.n)
    ea[a] = 1.0
    eb = np.zeros(G.n)
    eb[b] = 1.0
    zero = np.zeros(G.m)

    def h2(s, t):
        x1, z1 = G.mul(p.x, p.z, s * ea, zero)
        x2, z2 = G.mul(x1, z1, t * eb, zero)
        return f.fn(x2, z2)

    if mode == "central_difference":
        d = fd_step(p, h)
        return float((h2(d, d) - h2(d, -d) - h2(-d, d) + h2(-d, -d)) / (4.0 * d * d))
    s = Dual(Dual(0.0, 0.0), Dual(1.0, 0.0))
    t = Dual(Dual(0.0, 1.0), Dual(0.0, 0.0))
    return float(_part(h2(s, t), "b", "b"))


def sub_laplacian(
    G: CarnotGroup,
    f: ScalarField,
    p: Point,
    mode: Optional[str] = None,
    h=None,
    stencil: str = "nested",
) -> float:
    """sum_i X_i^2 f(p).

    ``stencil`` applies to central differences only: ``"nested"`` composes two
    first-order central passes, ``"fourth"`` is the 5-point fourth-order rule.
    """
    mode = mode or f.mode
    if mode == "analytic" and f.laplacian is not None:
        return float(f.laplacian(p.x, p.z))
    total = 0.0
    for k in range(G.n):
        vx, vz = _direction(G, k, p.x)
        g = _line(f, p, vx, vz)
        if mode == "central_difference":
            d = fd_step(p, h)
            if stencil == "fourth":
                total += (-g(2 * d) + 16 * g(d) - 30 * g(0.0) + 16 * g(-d) - g(-2 * d)) / (12.0 * d * d)
            elif stencil == "nested":
                total += (g(2 * d) - 2 * g(0.0) + g(-2 * d)) / (4.0 * d * d)
            else:
                raise InvalidParameter(f"unknown stencil {stencil!r}")
        else:
            t = Dual(Dual(0.0, 1.0), Dual(1.0, 0.0))
            total += _part(g(t), "b", "b")
    return float(total)


def horizontal_gradient_batch(G: CarnotGroup, f: ScalarField, x, z, h: Optional[float] = None) -> np.ndarray:
    """Horizontal gradients at many points, shape ``(count, n)``.

    Uses the analytic gradient when the field has one, otherwise vectorised
    central differences with the usual per-point step.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if f.grad is not None and f.mode == "analytic":
        return np.asarray(f.grad(x, z), dtype=float)
    if h is None:
        step = FD_REL_STEP * np.maximum(1.0, np.sqrt(np.sum(x * x, -1) + np.sum(z * z, -1)))
    else:
        step = np.full(x.shape[:-1], float(h))
    coeffs = _z_coefficients(G, x)
    out = np.empty(x.shape[:-1] + (G.n,))
    for i in range(G.n):
        dx = np.zeros_like(x)
        dx[..., i] = step
        dz = step[..., None] * coeffs[..., i, :]
        out[..., i] = (np.asarray(f.fn(x + dx, z + dz)) - np.asarray(f.fn(x - dx, z - dz))) / (2.0 * step)
    return out


def compose_left_translation(G: CarnotGroup, f: ScalarField, hpt: Point) -> ScalarField:
    """f o tau_h, i.e. p -> f(h o p).  Gradients transport by left invariance."""
    hx, hz = hpt.x, hpt.z

    def fn(x, z):
        return f.fn(*G.mul(hx, hz, x, z))

    grad = None
    if f.grad is not None:
        def grad(x, z):
            return f.grad(*G.mul(hx, hz, x, z))

    lap = None
    if f.laplacian is not None:
        def lap(x, z):
            return f.laplacian(*G.mul(hx, hz, x, z))

    return ScalarField(fn, grad, lap, f.mode, f"{f.name}∘τ")


def gradient_self_check(G: CarnotGroup, f: ScalarField, points, rtol: float = 1e-5) -> float:
    """Largest relative disagreement between ``f.grad`` and central differences.

    Raises if it exceeds ``rtol``; returns it otherwise.
    """
    if f.grad is None:
        raise InvalidParameter(f"field {f.name!r} has no analytic gradient to check")
    worst = 0.0
    for p in points:
        ga = sub_gradient(G, f, p, "analytic")
        gf = sub_gradient(G, f, p, "central_difference")
        scale = max(float(np.linalg.norm(gf)), 1e-300)
        worst = max(worst, float(np.linalg.norm(ga - gf)) / scale)
    if worst > rtol:
        raise InvalidParameter(f"analytic gradient of {f.name!r} disagrees with finite differences (rel {worst:.2e})")
    return worst


# -- small catalogue of fields used in tests and experiments --------------------

def constant_field(c: float) -> ScalarField:
    return field(
        lambda x, z: c + 0.0 * x[..., 0],
        grad=lambda x, z: np.zeros(np.shape(x)),
        laplacian=lambda x, z: np.zeros(np.shape(x)[:-1]),
        name=f"const({c})",
    )


def x_coordinate(G: CarnotGroup, i: int) -> ScalarField:
    """f = x_i (``i`` 1-based); X_j f = delta_ij."""
    k = _check_index(G, i)
    e = np.zeros(G.n)
    e[k] = 1.0
    return field(
        lambda x, z: x[..., k],
        grad=lambda x, z: np.broadcast_to(e, np.shape(x)).astype(float),
        laplacian=lambda x, z: np.zeros(np.shape(x)[:-1]),
        name=f"x{i}",
    )


def z_coordinate(G: CarnotGroup, k: int) -> ScalarField:
    """f = z_k (1-based).  No analytic gradient: exercises the numeric paths."""
    if not 1 <= k <= G.m:
        raise IndexOutOfRange(f"z index must be in 1..{G.m}, got {k}")
    return field(lambda x, z: z[..., k - 1], name=f"z{k}")


def x_square_norm() -> ScalarField:
    return field(
        lambda x, z: np.sum(x * x, axis=-1),
        grad=lambda x, z: 2.0 * np.asarray(x, dtype=float),
        name="|x|^2",
    )


def random_polynomial(G: CarnotGroup, seed, terms: int = 6, max_power: int = 2) -> ScalarField:
    """Random polynomial in all coordinates (dual-number friendly, no closed-form gradient)."""
    rng = np.random.default_rng(seed)
    d = G.n + G.m
    coef = rng.standard_normal(terms)
    powers = rng.integers(0, max_power + 1, size=(terms, d))

    def fn(x, z):
        total = 0.0
        for c, pw in zip(coef, powers):
            term = c
            for j, e in enumerate(pw):
                if e:
                    v = x[..., j] if j < G.n else z[..., j - G.n]
                    term = term * v**int(e)
            total = total + term
        return total

    return field(fn, name=f"poly[{seed}]")
