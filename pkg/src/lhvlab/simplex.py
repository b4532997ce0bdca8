"""Phase-one simplex on a dense tableau, with Farkas certificates.

Only feasibility of ``{q >= 0 : A q = b}`` is decided here.  When the
auxiliary problem ends with a positive optimum the simplex multipliers
give a vector ``y`` with ``y @ A <= 0`` and ``y @ b > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

PIVOT_TOL = 1e-10


@dataclass
class PhaseOneResult:
    x: np.ndarray
    """Basic solution of the auxiliary problem restricted to the original columns."""
    infeasibility: float
    """Optimal sum of the artificial variables."""
    farkas: np.ndarray
    """Simplex multipliers ``y`` in the coordinates of the original rows."""
    pivots: int


def independent_rows(a: np.ndarray, tol: float = PIVOT_TOL) -> list[int]:
    """Indices of a maximal set of linearly independent rows.

    Gaussian elimination with partial pivoting, visiting rows in order so
    that the earliest independent rows are kept.
    """
    work = np.array(a, dtype=float)
    scale = max(1.0, float(np.max(np.abs(work), initial=0.0)))
    basis: list[np.ndarray] = []
    pivots: list[int] = []
    keep: list[int] = []
    for i, row in enumerate(work):
        r = row.copy()
        for vec, col in zip(basis, pivots):
            r -= r[col] * vec
        col = int(np.argmax(np.abs(r)))
        if abs(r[col]) > tol * scale:
            basis.append(r / r[col])
            pivots.append(col)
            keep.append(i)
    return keep


def _pivot(t: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0.0
    t -= np.outer(factor, t[row])
    t[:, col] = 0.0
    t[row, col] = 1.0


def phase_one(a: np.ndarray, b: np.ndarray, max_pivots: int | None = None,
              tol: float = 1e-12) -> PhaseOneResult:
    """Minimize the sum of artificials for ``A q + s = b, q, s >= 0``.

    Bland's rule picks both the entering column (lowest index with negative
    reduced cost) and the leaving row (lowest basic index among ratio ties),
    which rules out cycling.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rows, cols = a.shape
    sign = np.where(b < 0, -1.0, 1.0)
    a = a * sign[:, None]
    b = b * sign
    # tableau: [A | I | b] with the phase-one objective row appended
    t = np.zeros((rows + 1, cols + rows + 1))
    t[:rows, :cols] = a
    t[:rows, cols:cols + rows] = np.eye(rows)
    t[:rows, -1] = b
    t[rows, :cols] = -a.sum(axis=0)
    t[rows, -1] = -b.sum()
    basis = list(range(cols, cols + rows))
    if max_pivots is None:
        max_pivots = 50 * (rows + cols) + 1000
    pivots = 0
    while True:
        reduced = t[rows, :cols + rows]
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            break
        col = int(entering[0])
        column = t[:rows, col]
        candidates = np.flatnonzero(column > PIVOT_TOL)
        if candidates.size == 0:
            raise SolverError("phase-one problem reported unbounded; this cannot happen")
        ratios = t[candidates, -1] / column[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(t, row, col)
        basis[row] = col
        pivots += 1
        if pivots > max_pivots:
            raise SolverError(f"simplex exceeded {max_pivots} pivots")
    x = np.zeros(cols)
    for r, var in enumerate(basis):
        if var < cols:
            x[var] = max(t[r, -1], 0.0)
    # simplex multipliers: reduced cost of artificial j is 1 - y_j
    y = 1.0 - t[rows, cols:cols + rows]
    return PhaseOneResult(
        x=x,
        infeasibility=float(-t[rows, -1]),
        farkas=y * sign,
        pivots=pivots,
    )
