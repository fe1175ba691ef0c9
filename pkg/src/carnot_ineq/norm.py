"""Homogeneous norm N = (|x|^4 + a|z|^2)^(1/4) and its horizontal derivatives.

With w_i = sum_{k,l} L^k_{il} x_l z_k the closed forms are

    X_i N   = N^-3 (|x|^2 x_i + a/4 w_i)
    |grad N|^2 = N^-6 (|x|^6 + a^2/16 |w|^2)          (x.w = 0 by skewness)
    Delta N = -3 N^-7 (|x|^6 + a^2/16 |w|^2)
              + N^-3 (n + 2) |x|^2
              + N^-3 a/8 sum_k |L^k x|^2

All ``*_batch`` helpers broadcast over leading axes.  At the identity the
closed forms are singular; the Point-level API raises, the batch API returns 0
for the gradient terms (the functions are bounded there) so that cutoff fields
can be evaluated on whole chains.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidParameter, OriginSingular, ZeroHorizontal
from .group import CarnotGroup, Point, dilate_arrays
from .hcalculus import ScalarField

RATIO_EXCLUDE = 1e-8


def norm_batch(G: CarnotGroup, x, z):
    x2 = np.sum(x * x, axis=-1)
    return (x2 * x2 + G.a * np.sum(z * z, axis=-1)) ** 0.25


def _w(G: CarnotGroup, x, z):
    return np.einsum("kil,...l,...k->...i", G.lambdas, x, z)


def _safe_pow(N, k):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(N > 0, N, 1.0) ** k
    return np.where(N > 0, out, 0.0)


def grad_N_batch(G: CarnotGroup, x, z):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    N = norm_batch(G, x, z)
    x2 = np.sum(x * x, axis=-1)
    return _safe_pow(N, -3)[..., None] * (x2[..., None] * x + 0.25 * G.a * _w(G, x, z))


def grad_N_sq_batch(G: CarnotGroup, x, z):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    N = norm_batch(G, x, z)
    x2 = np.sum(x * x, axis=-1)
    w = _w(G, x, z)
    return _safe_pow(N, -6) * (x2**3 + G.a**2 / 16.0 * np.sum(w * w, axis=-1))


def laplacian_N_batch(G: CarnotGroup, x, z):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    N = norm_batch(G, x, z)
    x2 = np.sum(x * x, axis=-1)
    w = _w(G, x, z)
    Lx = np.einsum("kil,...l->...ki", G.lambdas, x)
    first = -3.0 * _safe_pow(N, -7) * (x2**3 + G.a**2 / 16.0 * np.sum(w * w, axis=-1))
    second = _safe_pow(N, -3) * (G.n + 2) * x2
    third = _safe_pow(N, -3) * (G.a / 8.0) * np.sum(Lx * Lx, axis=(-2, -1))
    return first + second + third


def norm_N(G: CarnotGroup, p: Point) -> float:
    return float(norm_batch(G, p.x, p.z))


def _nonzero(G: CarnotGroup, p: Point) -> None:
    if not (np.any(p.x != 0) or np.any(p.z != 0)):
        raise OriginSingular("closed form is singular at the identity")


def grad_N_closed(G: CarnotGroup, p: Point) -> np.ndarray:
    _nonzero(G, p)
    return grad_N_batch(G, p.x, p.z)


def grad_N_sq(G: CarnotGroup, p: Point) -> float:
    _nonzero(G, p)
    return float(grad_N_sq_batch(G, p.x, p.z))


def laplacian_N_closed(G: CarnotGroup, p: Point) -> float:
    _nonzero(G, p)
    return float(laplacian_N_batch(G, p.x, p.z))


def _radial_derivative(G: CarnotGroup, x, z):
    """(x/|x|) . grad N evaluated as a single scalar formula.

    x . grad N = N^-3 (|x|^4 + a/4 sum_k z_k x^T L^k x).  The quadratic form is
    taken through the symmetric part of L^k (equal to x^T L^k x in exact
    arithmetic); dotting the gradient vector instead cancels terms of size
    a|z||x|^2 and loses all relative accuracy once |x|^2 << a|z|.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    sym = 0.5 * (G.lambdas + G.lambdas.transpose(0, 2, 1))
    quad = np.einsum("kil,...i,...l->...k", sym, x, x)
    x2 = np.sum(x * x, axis=-1)
    xn = np.sqrt(x2)
    N = norm_batch(G, x, z)
    return (x2 * x2 + 0.25 * G.a * np.sum(z * quad, axis=-1)) / (xn * N**3), xn, N


def radial_identity_residual(G: CarnotGroup, p: Point) -> float:
    """(x/|x|) . grad N - |x|^3/N^3, identically zero."""
    if not np.any(p.x != 0):
        raise ZeroHorizontal("radial identity needs x != 0")
    lhs, xn, N = _radial_derivative(G, p.x, p.z)
    return float(lhs - (xn / N) ** 3)


def radial_identity_residual_batch(G: CarnotGroup, x, z):
    """Relative residual |(x/|x|).grad N - |x|^3/N^3| / (|x|^3/N^3)."""
    lhs, xn, N = _radial_derivative(G, x, z)
    ref = (xn / N) ** 3
    return np.abs(lhs - ref) / ref


def norm_field(G: CarnotGroup) -> ScalarField:
    return ScalarField(
        lambda x, z: norm_batch(G, x, z),
        grad=lambda x, z: grad_N_batch(G, x, z),
        laplacian=lambda x, z: laplacian_N_batch(G, x, z),
        mode="analytic",
        name="N",
    )


def norm_power_field(G: CarnotGroup, s: float) -> ScalarField:
    """N^s, with Delta N^s = s N^(s-1) Delta N + s(s-1) N^(s-2) |grad N|^2."""

    def grad(x, z):
        N = norm_batch(G, x, z)
        return (s * _safe_pow(N, s - 1))[..., None] * grad_N_batch(G, x, z)

    def lap(x, z):
        N = norm_batch(G, x, z)
        return s * _safe_pow(N, s - 1) * laplacian_N_batch(G, x, z) + s * (s - 1) * _safe_pow(N, s - 2) * grad_N_sq_batch(G, x, z)

    return ScalarField(lambda x, z: norm_batch(G, x, z) ** s, grad, lap, "analytic", f"N^{s:g}")


def fundamental_solution_field(G: CarnotGroup) -> ScalarField:
    """N^(2-Q), harmonic away from the identity on H-type groups when a = 16."""
    return norm_power_field(G, 2.0 - G.q_hom)


# -- Lemma-2 style constants --------------------------------------------------

@dataclass
class NormGeometryReport:
    a_hat: float
    c_hat: float
    b_hat: float
    sample_count: int
    seed: int
    radius_range: tuple[float, float]
    a_hat_point: list = field(default_factory=list)
    c_hat_point: list = field(default_factory=list)
    b_hat_point: list = field(default_factory=list)
    laplacian_nonnegative: bool = False
    residual_max: float = 0.0
    excluded: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["radius_range"] = list(self.radius_range)
        return d


def sample_shell_points(G: CarnotGroup, count: int, seed, radius_range=(0.1, 10.0)):
    """Points with N log-uniform in ``radius_range``.

    Directions of x and z are uniform on their spheres; the split between the
    two layers is an angle theta uniform on (0, pi/2) with |x|^2 = N^2 cos(theta),
    sqrt(a)|z| = N^2 sin(theta), so both degenerate regimes are covered evenly.
    """
    rng = np.random.default_rng(seed)
    lo, hi = radius_range
    if not 0 < lo <= hi:
        raise InvalidParameter(f"bad radius range {radius_range}")
    ux = rng.standard_normal((count, G.n))
    ux /= np.linalg.norm(ux, axis=1, keepdims=True)
    uz = rng.standard_normal((count, G.m))
    uz /= np.linalg.norm(uz, axis=1, keepdims=True)
    theta = rng.uniform(0.0, 0.5 * np.pi, count)
    x = np.sqrt(np.cos(theta))[:, None] * ux
    z = (np.sin(theta) / np.sqrt(G.a))[:, None] * uz
    R = np.exp(rng.uniform(np.log(lo), np.log(hi), count))
    return dilate_arrays(R, x, z)


def lemma2_ratios(G: CarnotGroup, x, z):
    """(|grad N|^2 N^2/|x|^2, |Delta N| N^3/|x|^2, Delta N) for each point."""
    N = norm_batch(G, x, z)
    x2 = np.sum(x * x, axis=-1)
    lap = laplacian_N_batch(G, x, z)
    return grad_N_sq_batch(G, x, z) * N**2 / x2, np.abs(lap) * N**3 / x2, lap


def _shell_params_to_point(G: CarnotGroup, v):
    """Map an unconstrained vector to a point on {N = 1} (same chart as the sampler)."""
    theta = 0.25 * np.pi * (1.0 + np.tanh(v[0]))
    ux = v[1 : 1 + G.n]
    uz = v[1 + G.n :]
    x = np.sqrt(np.cos(theta)) * ux / np.linalg.norm(ux)
    z = np.sin(theta) / np.sqrt(G.a) * uz / np.linalg.norm(uz)
    return x, z


def _point_to_shell_params(G: CarnotGroup, x, z):
    N = float(norm_batch(G, x, z))
    x, z = x / N, z / N**2
    c = float(np.clip(np.sum(x * x), 1e-300, 1.0))
    theta = np.arccos(c)
    arg = np.clip(theta / (0.25 * np.pi) - 1.0, -1 + 1e-15, 1 - 1e-15)
    return np.concatenate([[np.arctanh(arg)], x, z])


def _polish(G: CarnotGroup, objective, starts):
    """Locally optimise ``objective`` (to be minimised) from the given points."""
    from scipy.optimize import minimize

    def f(v):
        x, z = _shell_params_to_point(G, v)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
            return np.inf
        if np.linalg.norm(x) / float(norm_batch(G, x, z)) < RATIO_EXCLUDE:
            return np.inf
        return float(objective(x[None], z[None])[0])

    best = None
    for x0, z0 in starts:
        res = minimize(f, _point_to_shell_params(G, x0, z0), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 3000})
        if np.isfinite(res.fun) and (best is None or res.fun < best[0]):
            best = (float(res.fun), *_shell_params_to_point(G, res.x))
    return best


def estimate_lemma2_constants(
    G: CarnotGroup,
    sample_count: int = 100_000,
    seed: int = 0,
    radius_range=(0.1, 10.0),
    polish: int = 2,
) -> NormGeometryReport:
    """Empirical Lemma 2 constants.

    The inf/sup are taken over ``sample_count`` shell points; with ``polish > 0``
    the best few samples of each extreme are refined by Nelder-Mead on the unit
    shell (the ratios are dilation invariant), and the refined value replaces
    the sampled one when it is more extreme.  Sampled points therefore always
    satisfy the reported sandwich.
    """
    if sample_count < 1000:
        raise InvalidParameter("sample_count must be at least 1000")
    x, z = sample_shell_points(G, sample_count, seed, radius_range)
    N = norm_batch(G, x, z)
    keep = np.linalg.norm(x, axis=1) / N >= RATIO_EXCLUDE
    x, z = x[keep], z[keep]
    grad_ratio, lap_ratio, lap = lemma2_ratios(G, x, z)
    ia, ic, ib = int(np.argmin(grad_ratio)), int(np.argmax(grad_ratio)), int(np.argmax(lap_ratio))
    extremes = {
        "a": [float(grad_ratio[ia]), x[ia], z[ia]],
        "c": [float(grad_ratio[ic]), x[ic], z[ic]],
        "b": [float(lap_ratio[ib]), x[ib], z[ib]],
    }
    if polish > 0 and not G.flags.htype:
        objectives = {
            "a": (lambda xx, zz: lemma2_ratios(G, xx, zz)[0], np.argsort(grad_ratio)),
            "c": (lambda xx, zz: -lemma2_ratios(G, xx, zz)[0], np.argsort(-grad_ratio)),
            "b": (lambda xx, zz: -lemma2_ratios(G, xx, zz)[1], np.argsort(-lap_ratio)),
        }
        for key, (obj, order) in objectives.items():
            found = _polish(G, obj, [(x[i], z[i]) for i in order[:polish]])
            if found is None:
                continue
            val = found[0] if key == "a" else -found[0]
            better = val < extremes[key][0] if key == "a" else val > extremes[key][0]
            if better:
                extremes[key] = [val, found[1], found[2]]

    def pt(entry):
        return {"x": np.asarray(entry[1]).tolist(), "z": np.asarray(entry[2]).tolist()}

    return NormGeometryReport(
        a_hat=extremes["a"][0],
        c_hat=extremes["c"][0],
        b_hat=extremes["b"][0],
        sample_count=int(sample_count),
        seed=int(seed),
        radius_range=(float(radius_range[0]), float(radius_range[1])),
        a_hat_point=pt(extremes["a"]),
        c_hat_point=pt(extremes["c"]),
        b_hat_point=pt(extremes["b"]),
        laplacian_nonnegative=bool(np.all(lap >= 0)),
        residual_max=float(np.max(radial_identity_residual_batch(G, x, z))),
        excluded=int(np.count_nonzero(~keep)),
    )


def c_le_one_threshold(G: CarnotGroup, directions: int = 4096, seed: int = 0) -> float:
    """Estimate of the largest a for which |grad N|^2 <= |x|^2/N^2 everywhere.

    |w| <= s(z)|x| with s(z) the top singular value of sum_k z_k L^k, so the
    bound holds once a <= 16 / max_{|z|=1} s(z)^2.  The maximum over unit z is
    taken over sampled directions (exact for m = 1).
    """
    rng = np.random.default_rng(seed)
    if G.m == 1:
        u = np.ones((1, 1))
    else:
        u = rng.standard_normal((directions, G.m))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
    M = np.einsum("dk,kij->dij", u, G.lambdas)
    s = np.linalg.norm(M, ord=2, axis=(1, 2))
    return float(16.0 / np.max(s) ** 2)


def min_horizontal_singular_value(G: CarnotGroup, directions: int = 4096, seed: int = 0) -> float:
    """min over unit z of the smallest singular value of sum_k z_k L^k.

    The lower Lemma 2 constant is positive exactly when this is: as |x| -> 0
    the ratio |grad N|^2 N^2/|x|^2 tends to a/16 |(sum_k z_k L^k) x|^2 on unit
    vectors.  Sampled over unit z, then refined by Nelder-Mead.
    """
    from scipy.optimize import minimize

    def smin(u):
        u = np.atleast_2d(u)
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        M = np.einsum("dk,kij->dij", u, G.lambdas)
        return np.linalg.svd(M, compute_uv=False)[:, -1]

    if G.m == 1:
        return float(smin(np.ones((1, 1)))[0])
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((directions, G.m))
    vals = smin(u)
    res = minimize(lambda v: float(smin(v)[0]), u[int(np.argmin(vals))], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15})
    return float(min(vals.min(), res.fun))


def is_nondegenerate(G: CarnotGroup, tol: float = 1e-6) -> bool:
    return min_horizontal_singular_value(G) > tol


def random_nondegenerate_step_two(n: int, m: int, seed: int, a: float = 1.0, max_tries: int = 10_000) -> CarnotGroup:
    """First group in a seeded stream of random groups with positive Lemma 2 lower constant."""
    from .group import random_step_two

    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(max_tries):
        G = random_step_two(n, m, int(child.generate_state(1)[0]), a)
        if is_nondegenerate(G):
            return G
    raise InvalidParameter(f"no nondegenerate ({n}, {m}) group found in {max_tries} draws")
