"""Local-polytope membership for fixed Bell scenarios.

A correlation tensor is Bell local exactly when it is a convex combination
of the deterministic vertices ``delta(a, J_k(x)) delta(b, K_j(y))``.  The
membership problem is a linear feasibility problem, solved here with a
phase-one simplex.  Infeasibility yields a Bell witness: a real tensor
``L`` with ``<L, v> >= local_bound`` on every vertex ``v`` and
``<L, p> < local_bound`` on the target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError, DimensionError, SolverError
from .quantum import CorrelationTensor
from .simplex import independent_rows, phase_one
from .strategies import DEFAULT_CAP, enumerate_strategies

FEAS_TOL = 1e-7


@dataclass(frozen=True)
class BellLocalModel:
    """Weights ``q[k, j]`` on pairs of deterministic strategies."""

    weights: np.ndarray
    scenario: tuple[int, int, int, int]
    """``(o_A, o_B, m_A, m_B)``."""

    def correlations(self) -> np.ndarray:
        """Rebuild ``P(a,b|x,y)`` from the weights by direct summation."""
        return reconstruct(self.weights, self.scenario)


@dataclass(frozen=True)
class BellWitness:
    coefficients: np.ndarray
    """``L[a, b, x, y]``, normalized to ``max |L| = 1``."""
    local_bound: float
    """Minimum of ``<L, v>`` over all local vertices."""
    value_on_target: float

    @property
    def margin(self) -> float:
        return self.local_bound - self.value_on_target


@dataclass(frozen=True)
class BellVerdict:
    local: bool
    model: Optional[BellLocalModel]
    witness: Optional[BellWitness]
    residual: float
    """Max entrywise reconstruction error (local) or separation margin (nonlocal)."""

    @property
    def tag(self) -> str:
        return "Local" if self.local else "Nonlocal"


def local_vertices(m_a: int, o_a: int, m_b: int, o_b: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All deterministic correlation tensors of the scenario.

    Returns an array ``(N_A * N_B, o_A, o_B, m_A, m_B)``; vertex ``k * N_B + j``
    pairs Alice's strategy ``k`` with Bob's strategy ``j``.
    """
    space_a = enumerate_strategies(m_a, o_a, cap)
    space_b = enumerate_strategies(m_b, o_b, cap)
    if space_a.size * space_b.size > cap:
        raise CapacityError(space_a.size * space_b.size, cap)
    sel_a = space_a.selector  # (N_A, m_A, o_A)
    sel_b = space_b.selector
    v = np.einsum("kxa,jyb->kjabxy", sel_a, sel_b)
    return v.reshape((space_a.size * space_b.size, o_a, o_b, m_a, m_b))


def reconstruct(weights: np.ndarray, shape: tuple[int, int, int, int]) -> np.ndarray:
    """``sum_{k,j} q[k,j] delta(a,J_k(x)) delta(b,K_j(y))`` for a scenario shape."""
    o_a, o_b, m_a, m_b = shape
    sel_a = enumerate_strategies(m_a, o_a).selector
    sel_b = enumerate_strategies(m_b, o_b).selector
    return np.einsum("kj,kxa,jyb->abxy", weights, sel_a, sel_b)


def evaluate_witness(w: BellWitness, p: CorrelationTensor | np.ndarray) -> float:
    probs = p.probabilities if isinstance(p, CorrelationTensor) else np.asarray(p, dtype=float)
    if probs.shape != w.coefficients.shape:
        raise DimensionError(f"witness shape {w.coefficients.shape} vs tensor {probs.shape}")
    return float(np.sum(w.coefficients * probs))


def witness_bound(coefficients: np.ndarray, cap: int = DEFAULT_CAP) -> float:
    """Exhaustive minimum of ``<L, v>`` over the local vertices."""
    o_a, o_b, m_a, m_b = coefficients.shape
    verts = local_vertices(m_a, o_a, m_b, o_b, cap)
    return float(np.min(np.tensordot(verts, coefficients, axes=4)))


def _witness_from_farkas(y_p: np.ndarray, p: np.ndarray, cap: int) -> BellWitness:
    coeff = -y_p.reshape(p.shape)
    scale = float(np.max(np.abs(coeff)))
    if scale == 0.0:
        raise SolverError("Farkas multipliers vanish; no separating functional")
    coeff = coeff / scale
    return BellWitness(
        coefficients=coeff,
        local_bound=witness_bound(coeff, cap),
        value_on_target=float(np.sum(coeff * p)),
    )


def decide_bell_local(
    p: CorrelationTensor, feas_tol: float = FEAS_TOL, cap: int = DEFAULT_CAP
) -> BellVerdict:
    """Decide whether ``p`` lies in the local polytope of its scenario.

    Returns a ``Local`` verdict with explicit weights when some distribution
    over deterministic strategy pairs reproduces ``p`` to within ``feas_tol``
    per entry, otherwise a ``Nonlocal`` verdict whose witness separates ``p``
    from every vertex by at least ``feas_tol``.

    Raises
    ------
    CapacityError
        If the strategy spaces exceed ``cap``.
    SolverError
        If neither certificate can be established, or if the simplex fails.
        Points within the numerical boundary band are reported Local when a
        slightly shrunken target yields weights that still reproduce ``p``
        within ``feas_tol``.
    """
    probs = p.probabilities
    o_a, o_b, m_a, m_b = probs.shape
    verts = local_vertices(m_a, o_a, m_b, o_b, cap)
    n_a = o_a**m_a
    n_b = o_b**m_b
    a_full = np.vstack([verts.reshape(len(verts), -1).T, np.ones(len(verts))])
    b_full = np.concatenate([probs.reshape(-1), [1.0]])

    keep = independent_rows(a_full)
    dropped = [i for i in range(len(b_full)) if i not in set(keep)]
    if dropped:
        # dependent rows: if p breaks one of these identities (e.g. it signals),
        # the dependency itself is the certificate
        coef, *_ = np.linalg.lstsq(a_full[keep].T, a_full[dropped].T, rcond=None)
        inconsistency = b_full[dropped] - coef.T @ b_full[keep]
        worst = int(np.argmax(np.abs(inconsistency)))
        if abs(inconsistency[worst]) > feas_tol:
            y = np.zeros(len(b_full))
            y[dropped[worst]] = 1.0
            y[keep] = -coef[:, worst]
            y *= np.sign(inconsistency[worst])
            witness = _witness_from_farkas(y[:-1], probs, cap)
            if witness.margin >= feas_tol:
                return BellVerdict(False, None, witness, witness.margin)

    result = phase_one(a_full[keep], b_full[keep])
    weights = result.x
    total = weights.sum()
    if total > 0:
        weights = weights / total
    recon = np.tensordot(weights, verts, axes=1)
    residual = float(np.max(np.abs(recon - probs)))
    if residual <= feas_tol:
        return BellVerdict(True, BellLocalModel(weights.reshape(n_a, n_b), probs.shape), None, residual)

    y = np.zeros(len(b_full))
    y[keep] = result.farkas
    witness = _witness_from_farkas(y[:-1], probs, cap)
    if witness.margin >= feas_tol:
        return BellVerdict(False, None, witness, witness.margin)

    # boundary band: the local set is closed, so a point this close to it is
    # reported Local, but only with weights that reproduce p within feas_tol.
    # Pulling the target slightly toward the barycenter of the vertices
    # moves it off the boundary by at most half the tolerance.
    shrink = 0.5 * feas_tol
    center = verts.mean(axis=0)
    b_shrunk = np.concatenate([((1 - shrink) * probs + shrink * center).reshape(-1), [1.0]])
    retry = phase_one(a_full[keep], b_shrunk[keep]).x
    if retry.sum() > 0:
        retry = retry / retry.sum()
        residual = float(np.max(np.abs(np.tensordot(retry, verts, axes=1) - probs)))
        if residual <= feas_tol:
            return BellVerdict(True, BellLocalModel(retry.reshape(n_a, n_b), probs.shape), None, residual)
    raise SolverError(
        f"boundary band: reconstruction residual {residual:.3e} and witness margin "
        f"{witness.margin:.3e} both miss feas_tol={feas_tol:g}"
    )
