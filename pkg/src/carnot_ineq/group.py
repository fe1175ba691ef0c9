"""Step-two Carnot groups in exponential coordinates.

A group is R^n x R^m with product

    (x, z) o (x', z') = (x + x', z_j + z'_j + 1/2 <L_j x, x'>)

for m skew-symmetric, linearly independent n x n matrices L_j.  Points are
plain coordinate pairs; the array-level helpers (``mul``, ``dilate_arrays``)
broadcast over leading axes and also accept object arrays of dual numbers, which
is what the calculus module relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadDimension, DependentMatrices, DimensionMismatch, InvalidParameter, SkewViolation

SKEW_TOL = 1e-12
RANK_RTOL = 1e-9
HTYPE_TOL = 1e-10


@dataclass(frozen=True)
class HTypeFlags:
    orthogonal: bool
    anticommuting: bool

    @property
    def htype(self) -> bool:
        return self.orthogonal and self.anticommuting


@dataclass(frozen=True)
class GroupValidation:
    skew_ok: bool
    independent_ok: bool
    dims_ok: bool
    flags: HTypeFlags
    max_skew_defect: float
    singular_values: tuple[float, ...]

    @property
    def valid(self) -> bool:
        return self.skew_ok and self.independent_ok and self.dims_ok


@dataclass(frozen=True, eq=False)
class CarnotGroup:
    """A validated step-two Carnot group with Kaplan-type norm parameter ``a``.

    Build instances through :func:`make_step_two` or :func:`make_heisenberg`;
    the constructor itself does not validate.
    """

    lambdas: np.ndarray  # shape (m, n, n)
    a: float
    flags: HTypeFlags = field(default=HTypeFlags(False, False))

    @property
    def n(self) -> int:
        return self.lambdas.shape[1]

    @property
    def m(self) -> int:
        return self.lambdas.shape[0]

    @property
    def q_hom(self) -> int:
        return self.n + 2 * self.m

    # -- array level -----------------------------------------------------
    def bracket(self, x, xp):
        """1/2 <L_j x, x'> for every j, broadcasting over leading axes."""
        return 0.5 * np.einsum("jab,...b,...a->...j", self.lambdas, x, xp)

    def mul(self, x1, z1, x2, z2):
        return x1 + x2, z1 + z2 + self.bracket(x1, x2)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "lambdas": self.lambdas.tolist(),
            "a": self.a,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __eq__(self, other):
        if not isinstance(other, CarnotGroup):
            return NotImplemented
        return (
            self.lambdas.shape == other.lambdas.shape
            and bool(np.array_equal(self.lambdas, other.lambdas))
            and self.a == other.a
        )

    def __hash__(self):
        return hash((self.lambdas.tobytes(), self.lambdas.shape, self.a))

    def __repr__(self):
        return f"CarnotGroup(n={self.n}, m={self.m}, a={self.a}, htype={self.flags.htype})"


@dataclass(frozen=True, eq=False)
class Point:
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x)
        z = np.asarray(self.z)
        if x.dtype != object:
            x = x.astype(float)
        if z.dtype != object:
            z = z.astype(float)
        object.__setattr__(self, "x", np.atleast_1d(x))
        object.__setattr__(self, "z", np.atleast_1d(z))

    def allclose(self, other: "Point", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return bool(
            np.allclose(self.x, other.x, atol=atol, rtol=rtol)
            and np.allclose(self.z, other.z, atol=atol, rtol=rtol)
        )

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.z])

    def __iter__(self):
        yield self.x
        yield self.z

    def __repr__(self):
        return f"Point(x={self.x.tolist()}, z={self.z.tolist()})"


def origin(G: CarnotGroup) -> Point:
    return Point(np.zeros(G.n), np.zeros(G.m))


# -- validation ---------------------------------------------------------------

def _as_stack(lambdas) -> np.ndarray:
    try:
        arr = np.asarray(lambdas, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadDimension(f"lambdas must be a list of equal-size square matrices: {exc}") from None
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise BadDimension(f"lambdas must be m square n x n matrices, got shape {arr.shape}")
    return arr


def htype_flags(lambdas: np.ndarray, tol: float = HTYPE_TOL) -> HTypeFlags:
    m, n, _ = lambdas.shape
    eye = np.eye(n)
    orthogonal = all(np.max(np.abs(L.T @ L - eye)) <= tol for L in lambdas)
    anticommuting = all(
        np.max(np.abs(lambdas[i] @ lambdas[j] + lambdas[j] @ lambdas[i])) <= tol
        for i in range(m)
        for j in range(i + 1, m)
    )
    return HTypeFlags(bool(orthogonal), bool(anticommuting))


def validate(lambdas, a: float = 1.0) -> GroupValidation:
    """Run every structural check without raising."""
    arr = _as_stack(lambdas)
    m, n, _ = arr.shape
    dims_ok = n >= 2 and m >= 1 and np.isfinite(arr).all() and a > 0
    skew_defect = float(np.max(np.abs(arr + arr.transpose(0, 2, 1)))) if arr.size else 0.0
    sv = np.linalg.svd(arr.reshape(m, n * n), compute_uv=False)
    independent = bool(sv.size == m and sv[0] > 0 and sv[-1] > RANK_RTOL * sv[0])
    return GroupValidation(
        skew_ok=skew_defect <= SKEW_TOL,
        independent_ok=independent,
        dims_ok=bool(dims_ok),
        flags=htype_flags(arr),
        max_skew_defect=skew_defect,
        singular_values=tuple(float(s) for s in sv),
    )


def make_step_two(lambdas, a: float) -> CarnotGroup:
    """Validate ``lambdas`` and build the group, raising on the first defect."""
    arr = _as_stack(lambdas)
    m, n, _ = arr.shape
    if n < 2 or m < 1:
        raise BadDimension(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    if not np.isfinite(arr).all():
        raise BadDimension("lambdas contain non-finite entries")
    if not (np.isfinite(a) and a > 0):
        raise InvalidParameter(f"norm parameter a must be positive, got {a}")
    report = validate(arr, a)
    if not report.skew_ok:
        raise SkewViolation(f"max |L + L^T| = {report.max_skew_defect:.3e} exceeds {SKEW_TOL}")
    if not report.independent_ok:
        raise DependentMatrices(f"singular values {report.singular_values} indicate rank < m={m}")
    arr = arr.copy()
    arr.setflags(write=False)
    return CarnotGroup(arr, float(a), report.flags)


def make_heisenberg(d: int = 1, a: float = 16.0) -> CarnotGroup:
    """Heisenberg group H^d: n = 2d, m = 1, symplectic block matrix."""
    if d < 1:
        raise BadDimension(f"d must be >= 1, got {d}")
    L = np.zeros((2 * d, 2 * d))
    for b in range(d):
        L[2 * b, 2 * b + 1] = 1.0
        L[2 * b + 1, 2 * b] = -1.0
    return make_step_two([L], a)


def random_step_two(n: int, m: int, seed: int, a: float = 1.0) -> CarnotGroup:
    """Group with m random Gaussian skew matrices; generically not H-type."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n, n))
    return make_step_two(0.5 * (A - A.transpose(0, 2, 1)), a)


def group_from_dict(d: dict) -> CarnotGroup:
    G = make_step_two(d["lambdas"], d["a"])
    if "n" in d and d["n"] != G.n or "m" in d and d["m"] != G.m:
        raise BadDimension(f"declared (n, m)=({d.get('n')}, {d.get('m')}) but lambdas give ({G.n}, {G.m})")
    return G


def group_from_json(text: str) -> CarnotGroup:
    return group_from_dict(json.loads(text))


# -- point operations ---------------------------------------------------------

def _check(G: CarnotGroup, *points: Point) -> None:
    for p in points:
        if p.x.shape[-1] != G.n or p.z.shape[-1] != G.m:
            raise DimensionMismatch(
                f"point with (n, m)=({p.x.shape[-1]}, {p.z.shape[-1]}) does not belong to group with ({G.n}, {G.m})"
            )


def group_op(G: CarnotGroup, p: Point, r: Point) -> Point:
    _check(G, p, r)
    return Point(*G.mul(p.x, p.z, r.x, r.z))


def inverse(p: Point) -> Point:
    return Point(-p.x, -p.z)


def dilate(lambda_s: float, p: Point) -> Point:
    if not lambda_s > 0:
        raise InvalidParameter(f"dilation factor must be positive, got {lambda_s}")
    return Point(lambda_s * p.x, lambda_s**2 * p.z)


def dilate_arrays(lambda_s, x, z):
    lam = np.asarray(lambda_s)
    return lam[..., None] * x, (lam**2)[..., None] * z


def quasi_distance(G: CarnotGroup, p: Point, r: Point) -> float:
    """Left-invariant quasi-distance N(r^-1 o p)."""
    from .norm import norm_N

    return norm_N(G, group_op(G, inverse(r), p))


def random_point(G: CarnotGroup, rng_seed, scale: float = 1.0) -> Point:
    """x ~ N(0, scale^2 I), z ~ N(0, scale^4 I); deterministic in ``rng_seed``.

    ``rng_seed`` may also be a ``numpy.random.Generator`` owned by the caller.
    """
    if not scale > 0:
        raise InvalidParameter(f"scale must be positive, got {scale}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return Point(scale * rng.standard_normal(G.n), scale**2 * rng.standard_normal(G.m))


def random_points(G: CarnotGroup, count: int, rng_seed, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Batch analogue of :func:`random_point`, returned as (x, z) arrays."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return scale * rng.standard_normal((count, G.n)), scale**2 * rng.standard_normal((count, G.m))


def skew_cancellation(G: CarnotGroup, x: Sequence[float]) -> np.ndarray:
    """sum_{j,l} L^k_{jl} x_l x_j for each k; identically zero for skew L."""
    x = np.asarray(x, dtype=float)
    return np.einsum("kjl,l,j->k", G.lambdas, x, x)
