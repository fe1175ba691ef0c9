"""Test functions for the inequality catalogs.

Every built-in function carries an analytic horizontal gradient.  Functions
of N alone also carry ``radial``, their profile as a function of N, so the
quadrature oracle can evaluate the same functionals.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..group import CarnotGroup
from ..hcalculus import ScalarField
from ..norm import grad_N_batch, norm_batch


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    name: str
    field: ScalarField
    family_params: tuple = ()
    radial: Optional[Callable] = field(default=None, compare=False)

    def values(self, x, z) -> np.ndarray:
        return self.field.values(x, z)

    def scaled(self, c: float) -> "TestFunction":
        """c * f with gradient c * grad f."""
        f = self.field
        grad = None if f.grad is None else (lambda x, z: c * np.asarray(f.grad(x, z)))
        sf = ScalarField(lambda x, z: c * np.asarray(f.fn(x, z)), grad, None, f.mode, f"{c:g}*{f.name}")
        rad = None if self.radial is None else (lambda N: c * self.radial(N))
        return replace(self, name=f"{c:g}*{self.name}", field=sf, radial=rad)

    def shifted(self, c: float) -> "TestFunction":
        """f + c, same gradient."""
        f = self.field
        sf = ScalarField(lambda x, z: np.asarray(f.fn(x, z)) + c, f.grad, f.laplacian, f.mode, f"{f.name}+{c:g}")
        rad = None if self.radial is None else (lambda N: self.radial(N) + c)
        return replace(self, name=f"{self.name}+{c:g}", field=sf, radial=rad)


def as_field(f) -> ScalarField:
    return f.field if isinstance(f, TestFunction) else f


def _analytic(fn, grad, name) -> ScalarField:
    return ScalarField(fn, grad, None, "analytic", name)


def coordinate_function(G: CarnotGroup, i: int) -> TestFunction:
    """x_i with 1-based i."""
    e = np.zeros(G.n)
    e[i - 1] = 1.0

    def fn(x, z):
        return np.asarray(x, float)[..., i - 1]

    def grad(x, z):
        return np.broadcast_to(e, np.shape(x)).copy()

    return TestFunction(f"x{i}", _analytic(fn, grad, f"x{i}"), (i,))


def coordinate_product(G: CarnotGroup, i: int, j: int) -> TestFunction:
    """x_i x_j with 1-based indices."""

    def fn(x, z):
        x = np.asarray(x, float)
        return x[..., i - 1] * x[..., j - 1]

    def grad(x, z):
        x = np.asarray(x, float)
        out = np.zeros(x.shape)
        out[..., i - 1] += x[..., j - 1]
        out[..., j - 1] += x[..., i - 1]
        return out

    name = f"x{i}*x{j}"
    return TestFunction(name, _analytic(fn, grad, name), (i, j))


def radial_function(G: CarnotGroup, name: str, u: Callable, du: Callable) -> TestFunction:
    """u(N) with gradient u'(N) grad N."""

    def fn(x, z):
        return u(norm_batch(G, np.asarray(x, float), np.asarray(z, float)))

    def grad(x, z):
        x, z = np.asarray(x, float), np.asarray(z, float)
        N = norm_batch(G, x, z)
        return du(N)[..., None] * grad_N_batch(G, x, z)

    return TestFunction(name, _analytic(fn, grad, name), (), radial=u)


def radial_family(G: CarnotGroup) -> list[TestFunction]:
    return [
        radial_function(G, "N", lambda N: N, np.ones_like),
        radial_function(G, "N^2", lambda N: N * N, lambda N: 2.0 * N),
        radial_function(G, "log(1+N^2)", lambda N: np.log1p(N * N), lambda N: 2.0 * N / (1.0 + N * N)),
        radial_function(G, "1/(1+N)", lambda N: 1.0 / (1.0 + N), lambda N: -1.0 / (1.0 + N) ** 2),
    ]


def random_quadratic(G: CarnotGroup, seed, index: int = 0) -> TestFunction:
    """0.5 x^T A x + b.x + c.z + d with seeded Gaussian coefficients.

    X_i f = (A x)_i + b_i + 0.5 sum_k c_k (Lambda^k x)_i.
    """
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((G.n, G.n))
    A = 0.5 * (B + B.T)
    b = rng.standard_normal(G.n)
    c = rng.standard_normal(G.m)
    d = float(rng.standard_normal())
    M = A + 0.5 * np.einsum("k,kil->il", c, G.lambdas)

    def fn(x, z):
        x, z = np.asarray(x, float), np.asarray(z, float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, A, x) + x @ b + z @ c + d

    def grad(x, z):
        return np.asarray(x, float) @ M.T + b

    name = f"quad{index}"
    params = tuple(A.ravel()) + tuple(b) + tuple(c) + (d,)
    return TestFunction(name, _analytic(fn, grad, name), params)


def random_quadratics(G: CarnotGroup, seed: int, count: int = 10) -> list[TestFunction]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [random_quadratic(G, np.random.default_rng(s), i) for i, s in enumerate(children)]


def cutoff_profile(N):
    """chi(N) = clamp(N - 1, 0, 1)."""
    return np.clip(np.asarray(N, float) - 1.0, 0.0, 1.0)


def _cutoff_slope(N):
    N = np.asarray(N, float)
    return ((N > 1.0) & (N < 2.0)).astype(float)


def apply_exterior_cutoff(f, G: CarnotGroup) -> TestFunction:
    """f * chi(N): zero on {N <= 1}, equal to f on {N >= 2}.

    The gradient follows the product rule, chi grad f + f chi'(N) grad N,
    using the analytic gradient of f when it has one.
    """
    from ..hcalculus import horizontal_gradient_batch

    tf = f if isinstance(f, TestFunction) else TestFunction(f.name, f)
    base = tf.field

    def fn(x, z):
        x, z = np.asarray(x, float), np.asarray(z, float)
        return cutoff_profile(norm_batch(G, x, z)) * np.asarray(base.fn(x, z), float)

    def grad(x, z):
        x, z = np.asarray(x, float), np.asarray(z, float)
        N = norm_batch(G, x, z)
        chi = cutoff_profile(N)
        gf = horizontal_gradient_batch(G, base, x, z)
        fv = np.asarray(base.fn(x, z), float)
        return chi[..., None] * gf + (fv * _cutoff_slope(N))[..., None] * grad_N_batch(G, x, z)

    name = f"cut({tf.name})"
    rad = None if tf.radial is None else (lambda N: cutoff_profile(N) * tf.radial(N))
    return TestFunction(name, _analytic(fn, grad, name), tf.family_params, radial=rad)


def base_catalog(G: CarnotGroup, seed: int = 0, quadratics: int = 10) -> list[TestFunction]:
    """x_i, x_i x_j (i <= j), the radial family and seeded random quadratics."""
    funcs = [coordinate_function(G, i) for i in range(1, G.n + 1)]
    funcs += [coordinate_product(G, i, j) for i in range(1, G.n + 1) for j in range(i, G.n + 1)]
    funcs += radial_family(G)
    funcs += random_quadratics(G, seed, quadratics)
    return funcs
