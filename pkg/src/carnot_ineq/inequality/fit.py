"""Smallest constants (c, d) with lhs_i <= c energy_i + d mass_i for all rows.

The feasible set is a convex polygon in the quadrant c, d >= 0, so c + d is
minimized at a vertex: a pairwise intersection of constraint lines, or the
intercept of one constraint with an axis.  Enumeration is exact and cheap
for the few dozen rows a catalog produces.
"""

from __future__ import annotations

import numpy as np

from ..errors import Infeasible, InvalidParameter

TIE_RTOL = 1e-12


def _as_rows(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter("rows must be finite")
    if np.any(arr < 0):
        raise InvalidParameter("rows must be nonnegative")
    return arr


def _candidates(E, M, L) -> np.ndarray:
    # constraint lines E c + M d = L together with the axes c = 0 and d = 0
    A = np.concatenate([np.stack([E, M], 1), [[1.0, 0.0], [0.0, 1.0]]])
    b = np.concatenate([L, [0.0, 0.0]])
    i, j = np.triu_indices(A.shape[0], 1)
    det = A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]
    ok = det != 0
    i, j, det = i[ok], j[ok], det[ok]
    with np.errstate(over="ignore", invalid="ignore"):
        c = (b[i] * A[j, 1] - A[i, 1] * b[j]) / det
        d = (A[i, 0] * b[j] - b[i] * A[j, 0]) / det
    P = np.stack([c, d], 1)
    return P[np.all(np.isfinite(P), axis=1)]  # vertices beyond float range are unusable


def _repair(c: float, d: float, E, M, L) -> tuple[float, float]:
    """Scale (c, d) up until every row holds exactly in floating point."""
    for _ in range(64):
        rhs = c * E + d * M
        bad = L > rhs
        if not np.any(bad):
            return c, d
        factor = float(np.max(L[bad] / rhs[bad]))
        c, d = c * factor * (1 + 4e-16), d * factor * (1 + 4e-16)
    raise Infeasible("could not repair rounding in fitted constants")


def fit_constants(rows) -> tuple[float, float]:
    """Minimize c + d subject to the row constraints and c, d >= 0.

    Ties in c + d go to the smallest c.  Raises Infeasible only when a row
    has energy = mass = 0 but positive lhs.
    """
    R = _as_rows(rows)
    L, E, M = R[:, 0], R[:, 1], R[:, 2]
    if np.any((E == 0) & (M == 0) & (L > 0)):
        raise Infeasible("a row with zero energy and zero mass has positive lhs")
    if not np.any(E > 0) and not np.any(M > 0):
        raise InvalidParameter("need at least one row with energy or mass > 0")
    active = L > 0
    if not np.any(active):
        return 0.0, 0.0
    L, E, M = L[active], E[active], M[active]
    P = _candidates(E, M, L)
    P = P[(P[:, 0] >= 0) & (P[:, 1] >= 0)]
    scale = np.maximum(P[:, 0, None] * E + P[:, 1, None] * M, 1e-300)
    slack = (P[:, 0, None] * E + P[:, 1, None] * M - L) / np.maximum(L, scale)
    P = P[np.all(slack >= -1e-9, axis=1)]
    if P.size == 0:
        raise Infeasible("no feasible vertex with finite constants")
    obj = P.sum(1)
    best = obj.min()
    tied = P[obj <= best * (1 + TIE_RTOL) + 1e-300]
    c, d = tied[np.argmin(tied[:, 0])]
    c, d = _repair(float(c), float(d), E, M, L)
    return c + 0.0, d + 0.0  # no negative zeros


def is_feasible(rows, c: float, d: float) -> bool:
    R = _as_rows(rows)
    return bool(np.all(R[:, 0] <= c * R[:, 1] + d * R[:, 2]))
