"""Local-hidden-state models, steering witnesses and steering criteria.

An assemblage ``rho_{a|x}`` admits an LHS model iff there are PSD operators
``tau_k`` (one per deterministic strategy ``J_k``) with unit total trace and
``rho_{a|x} = sum_k delta(a, J_k(x)) tau_k``.  The feasible set of
``tau`` is compact and convex, so we minimize the squared Hilbert-Schmidt
distance between the reconstruction and the target over it.  The
linear-minimization oracle of that set (a minimum eigenpair per strategy
block) gives a Frank-Wolfe duality gap at every iterate, which turns the
attained distance into a certified interval for the true distance.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .errors import DomainError, IndeterminateError, NotEntangledError, SolverError
from .quantum import (
    Assemblage,
    Basis,
    DensityMatrix,
    MeasurementAssemblage,
    Povm,
    assemblage_of,
    fourier_basis,
    is_disjoint,
    pure_vector,
)
from .strategies import DEFAULT_CAP, StrategySpace, enumerate_strategies

DIST_TOL = 1e-6
GAP_TOL = 1e-8
MAX_ITERS = 50000
CRITERION_TOL = 1e-8


@dataclass(frozen=True)
class LhsModel:
    """Positive operators ``tau[k]`` indexed by the strategies of ``space``."""

    tau: np.ndarray
    space: StrategySpace

    def reconstruct(self) -> np.ndarray:
        """``sum_k delta(a, J_k(x)) tau_k`` as an array ``(m, o, d, d)``."""
        return np.einsum("kxa,kij->xaij", self.space.selector, self.tau)

    @property
    def weights(self) -> np.ndarray:
        """Hidden-state probabilities ``pi_k = tr(tau_k)``."""
        return np.trace(self.tau, axis1=1, axis2=2).real

    def hidden_states(self) -> list[Optional[np.ndarray]]:
        """Normalized hidden states ``tau_k / pi_k`` (``None`` where ``pi_k = 0``)."""
        return [t / p if p > 0 else None for t, p in zip(self.tau, self.weights)]


@dataclass(frozen=True)
class LhsSolution:
    model: LhsModel
    distance: float
    fw_gap: float
    iterations: int
    converged: bool

    @property
    def lower_bound(self) -> float:
        """Certified lower bound on the true distance to the LHS set."""
        return float(np.sqrt(max(self.distance**2 - self.fw_gap, 0.0)))


@dataclass(frozen=True)
class SteeringWitness:
    functionals: np.ndarray
    """``F[x, a]`` Hermitian, normalized so the largest operator norm is 1."""
    lhs_bound: float
    """``max_J lambda_max(sum_x F[x, J(x)])``: the largest value on any LHS assemblage."""
    value_on_target: float

    @property
    def margin(self) -> float:
        return self.value_on_target - self.lhs_bound


@dataclass(frozen=True)
class SteeringVerdict:
    unsteerable: bool
    model: Optional[LhsModel]
    witness: Optional[SteeringWitness]
    distance: float
    fw_gap: float
    iterations: int = 0

    @property
    def tag(self) -> str:
        return "Unsteerable" if self.unsteerable else "Steerable"


@dataclass(frozen=True)
class DisjointCriterionCertificate:
    """Conditional states ``c_i |e_i><e_i|`` and ``d_i |f_i><f_i|`` from two POVMs.

    ``e`` and ``f`` hold unit vectors as columns.  They span Bob's space but
    need not be orthonormal.
    """

    e: np.ndarray
    f: np.ndarray
    c: np.ndarray
    d: np.ndarray
    p: Povm
    q: Povm


# -- solver internals --------------------------------------------------------


def _eig_blocks(mats: np.ndarray, threads: int = 1):
    if threads <= 1 or len(mats) < 2:
        return linalg.hermitian_eigen_batch(mats, tol=1e-6)
    chunks = np.array_split(np.arange(len(mats)), min(threads, len(mats)))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda idx: linalg.hermitian_eigen_batch(mats[idx], tol=1e-6), chunks))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _simplex_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(u) + 1)
    r = np.flatnonzero(u * idx > css - 1.0)[-1]
    theta = (css[r] - 1.0) / (r + 1)
    return np.maximum(v - theta, 0.0)


class _Problem:
    """``f(tau) = sum_{x,a} || A(tau)[x,a] - sigma[x,a] ||_HS^2``."""

    def __init__(self, sigma: Assemblage, space: StrategySpace, threads: int):
        self.sigma = sigma.members
        self.sel = space.selector
        self.space = space
        self.threads = threads
        self.lipschitz = 2.0 * space.m * space.o ** (space.m - 1)

    def forward(self, tau):
        return np.einsum("kxa,kij->xaij", self.sel, tau)

    def adjoint(self, r):
        return np.einsum("kxa,xaij->kij", self.sel, r)

    def value(self, tau) -> float:
        r = self.forward(tau) - self.sigma
        return float(np.vdot(r, r).real)

    def gradient(self, tau):
        r = self.forward(tau) - self.sigma
        g = 2.0 * self.adjoint(r)
        return float(np.vdot(r, r).real), 0.5 * (g + linalg.dagger(g))

    def oracle(self, g):
        """Minimum eigenpair over all blocks: the extreme point minimizing ``<g, .>``."""
        values, vectors = _eig_blocks(g, self.threads)
        k = int(np.argmin(values[:, 0]))
        return k, float(values[k, 0]), vectors[k][:, 0]

    def gap(self, tau, g, lam_min) -> float:
        return float(np.vdot(g, tau).real) - lam_min

    def project(self, y):
        values, vectors = _eig_blocks(0.5 * (y + linalg.dagger(y)), self.threads)
        lam = _simplex_projection(values.reshape(-1)).reshape(values.shape)
        return np.einsum("kij,kj,klj->kil", vectors, lam, vectors.conj())


def _initial_point(sigma: Assemblage, space: StrategySpace) -> np.ndarray:
    rho_b = sigma.reduced_state()
    return np.broadcast_to(rho_b / space.size, (space.size,) + rho_b.shape).copy()


def _check_monotone(f_new: float, f_old: float) -> None:
    if f_new > f_old + 1e-13 * max(1.0, f_old):
        raise SolverError(f"objective increased from {f_old:.17g} to {f_new:.17g}")


def _stop(f: float, gap: float, gap_tol: float, target: Optional[float]) -> bool:
    if target is None:
        return gap <= gap_tol
    if f <= target**2:
        return True
    return gap <= gap_tol and np.sqrt(max(f - gap, 0.0)) > target


def _solve_accelerated(problem: _Problem, tau, max_iters, gap_tol, target):
    y = tau.copy()
    t = 1.0
    f, g = problem.gradient(tau)
    for it in range(max_iters):
        _, lam, _ = problem.oracle(g)
        gap = problem.gap(tau, g, lam)
        if _stop(f, gap, gap_tol, target):
            return tau, f, gap, it, True
        _, gy = problem.gradient(y)
        candidate = problem.project(y - gy / problem.lipschitz)
        f_new, g_new = problem.gradient(candidate)
        if f_new > f:
            if t == 1.0:
                _check_monotone(f_new, f)
                # plain projected-gradient step stalled at rounding level
                return tau, f, gap, it, gap <= gap_tol
            y = tau.copy()
            t = 1.0
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = candidate + ((t - 1.0) / t_next) * (candidate - tau)
        tau, f, g, t = candidate, f_new, g_new, t_next
    _, lam, _ = problem.oracle(g)
    return tau, f, problem.gap(tau, g, lam), max_iters, False


def _solve_frank_wolfe(problem: _Problem, tau, max_iters, gap_tol, target):
    """Pairwise Frank-Wolfe over rank-one atoms with exact line search."""
    d = tau.shape[1]
    values, vectors = _eig_blocks(tau, problem.threads)
    atoms: list[tuple[int, np.ndarray]] = []
    weights: list[float] = []
    for k in range(len(tau)):
        for j in range(d):
            if values[k, j] > 0:
                atoms.append((k, vectors[k][:, j]))
                weights.append(float(values[k, j]))
    total = sum(weights)
    weights = [w / total for w in weights]

    def atom_image(k, v):
        out = np.zeros_like(problem.sigma)
        proj = np.outer(v, v.conj())
        for x, a in enumerate(problem.space.table[k]):
            out[x, a] += proj
        return out

    images = [atom_image(k, v) for k, v in atoms]
    recon = sum(w * im for w, im in zip(weights, images))

    def as_tau():
        out = np.zeros_like(tau)
        for (k, v), w in zip(atoms, weights):
            out[k] += w * np.outer(v, v.conj())
        return out

    f = gap = float("nan")
    for it in range(max_iters):
        r = recon - problem.sigma
        f = float(np.vdot(r, r).real)
        g = 2.0 * problem.adjoint(r)
        g = 0.5 * (g + linalg.dagger(g))
        k, lam, v = problem.oracle(g)
        gap = float(2.0 * np.vdot(r, recon).real) - lam
        if _stop(f, gap, gap_tol, target):
            return as_tau(), f, gap, it, True
        scores = [2.0 * float(np.vdot(r, im).real) for im in images]
        away = int(np.argmax(scores))
        toward = atom_image(k, v)
        direction = toward - images[away]
        dd = float(np.vdot(direction, direction).real)
        if dd == 0.0:
            return as_tau(), f, gap, it, gap <= gap_tol
        step = min(max(-float(np.vdot(r, direction).real) / dd, 0.0), weights[away])
        recon = recon + step * direction
        weights[away] -= step
        atoms.append((k, v))
        weights.append(step)
        images.append(toward)
        keep = [i for i, w in enumerate(weights) if w > 1e-16]
        atoms = [atoms[i] for i in keep]
        weights = [weights[i] for i in keep]
        images = [images[i] for i in keep]
        r_new = recon - problem.sigma
        _check_monotone(float(np.vdot(r_new, r_new).real), f)
    return as_tau(), f, gap, max_iters, False


def nearest_lhs_model(
    sigma: Assemblage,
    cap: int = DEFAULT_CAP,
    max_iters: int = MAX_ITERS,
    gap_tol: float = GAP_TOL,
    method: str = "accelerated",
    target_distance: Optional[float] = None,
    threads: int = 1,
) -> LhsSolution:
    """Closest LHS reconstruction to ``sigma`` in Hilbert-Schmidt distance.

    Parameters
    ----------
    sigma : Assemblage
        Target conditional states.
    cap : int
        Largest strategy space allowed.
    max_iters : int
        Iteration cap; ``converged`` is False when it is hit.
    gap_tol : float
        Stop once the Frank-Wolfe duality gap falls below this value.
    method : {"accelerated", "frank-wolfe"}
        ``"accelerated"`` runs projected gradient with Nesterov momentum and
        adaptive restart; the projection diagonalizes every block and
        projects the pooled spectrum onto the simplex.  ``"frank-wolfe"``
        runs pairwise Frank-Wolfe over rank-one atoms with exact line search.
    target_distance : float, optional
        Also stop as soon as the distance is known to be below, or certified
        above, this value.
    threads : int
        Worker threads for the per-block eigendecompositions.  Results do
        not depend on this value.

    Returns
    -------
    LhsSolution
        The final model, its distance ``sqrt(f)``, the duality gap, the
        iteration count and whether a stopping criterion was met.
    """
    space = enumerate_strategies(sigma.m, sigma.o, cap)
    problem = _Problem(sigma, space, threads)
    tau0 = _initial_point(sigma, space)
    if method == "accelerated":
        solver = _solve_accelerated
    elif method == "frank-wolfe":
        solver = _solve_frank_wolfe
    else:
        raise DomainError(f"unknown method {method!r}")
    tau, f, gap, iters, converged = solver(problem, tau0, max_iters, gap_tol, target_distance)
    tau = 0.5 * (tau + linalg.dagger(tau))
    return LhsSolution(
        model=LhsModel(tau, space),
        distance=float(np.sqrt(max(f, 0.0))),
        fw_gap=max(float(gap), 0.0),
        iterations=iters,
        converged=converged,
    )


# -- witnesses ---------------------------------------------------------------


def steering_bound(functionals: np.ndarray, space: StrategySpace) -> float:
    """``max_k lambda_max(sum_x F[x, J_k(x)])`` by sweeping every strategy."""
    blocks = np.einsum("kxa,xaij->kij", space.selector, functionals)
    values, _ = linalg.hermitian_eigen_batch(0.5 * (blocks + linalg.dagger(blocks)), tol=1e-8)
    return float(np.max(values[:, -1]))


def evaluate_steering_witness(w: SteeringWitness, sigma: Assemblage | np.ndarray) -> float:
    """``sum_{x,a} tr(F[x,a] rho_{a|x})``."""
    members = sigma.members if isinstance(sigma, Assemblage) else np.asarray(sigma)
    if members.shape != w.functionals.shape:
        raise DomainError(f"witness shape {w.functionals.shape} vs {members.shape}")
    return float(np.einsum("xaij,xaji->", w.functionals, members).real)


def witness_from_gradient(sigma: Assemblage, model: LhsModel) -> SteeringWitness:
    """Separating functional along ``sigma - reconstruction``.

    Raises
    ------
    DomainError
        If the model already reproduces ``sigma`` (distance below 1e-12).
    """
    diff = sigma.members - model.reconstruct()
    diff = 0.5 * (diff + linalg.dagger(diff))
    if np.sqrt(np.vdot(diff, diff).real) < 1e-12:
        raise DomainError("model reproduces the assemblage; no separating functional")
    flat = diff.reshape((-1,) + diff.shape[-2:])
    values, _ = linalg.hermitian_eigen_batch(flat, tol=1e-8)
    f = diff / float(np.max(np.abs(values)))
    w = SteeringWitness(f, steering_bound(f, model.space), 0.0)
    return SteeringWitness(f, w.lhs_bound, evaluate_steering_witness(w, sigma))


# -- decisions ---------------------------------------------------------------


def decide_unsteerable(
    sigma: Assemblage,
    dist_tol: float = DIST_TOL,
    gap_tol: float = GAP_TOL,
    max_iters: int = MAX_ITERS,
    cap: int = DEFAULT_CAP,
    method: str = "accelerated",
    threads: int = 1,
) -> SteeringVerdict:
    """Decide whether ``sigma`` has an LHS model.

    ``Unsteerable`` is reported when the reconstruction is within
    ``dist_tol`` of ``sigma`` (with the model re-checked by direct
    summation); ``Steerable`` when the certified lower bound on the distance
    exceeds ``dist_tol`` with the duality gap below ``gap_tol`` (with a
    witness re-checked against the exhaustive strategy bound).

    Raises
    ------
    IndeterminateError
        If the iteration cap is reached before either condition holds.
    """
    sol = nearest_lhs_model(sigma, cap, max_iters, gap_tol, method, dist_tol, threads)
    if sol.distance <= dist_tol:
        residual = float(np.linalg.norm(sol.model.reconstruct() - sigma.members))
        if residual > dist_tol:
            raise SolverError(f"LHS model re-check failed: residual {residual:.3e}")
        return SteeringVerdict(True, sol.model, None, sol.distance, sol.fw_gap, sol.iterations)
    if sol.fw_gap <= gap_tol and sol.lower_bound > dist_tol:
        witness = witness_from_gradient(sigma, sol.model)
        if not witness.margin > 0:
            raise SolverError(f"steering witness fails re-check (margin {witness.margin:.3e})")
        return SteeringVerdict(False, None, witness, sol.distance, sol.fw_gap, sol.iterations)
    raise IndeterminateError(
        f"distance {sol.distance:.3e} with gap {sol.fw_gap:.3e} after {sol.iterations} "
        f"iterations does not separate from dist_tol={dist_tol:g}; "
        "tighten gap_tol or raise max_iters"
    )


# -- constructive criteria ---------------------------------------------------


def rank_one_part(op: np.ndarray, tol: float = CRITERION_TOL):
    """Return ``(c, x)`` with ``op = c |x><x|`` if ``op`` is numerically rank one.

    Returns ``None`` if the second-largest eigenvalue exceeds ``tol`` or the
    operator is not PSD within ``tol``.
    """
    values, vectors = linalg.hermitian_eigen(0.5 * (op + op.conj().T), tol=1e-8)
    if values[0] < -tol or (len(values) > 1 and values[-2] > tol):
        return None
    x = vectors[:, -1]
    k = int(np.argmax(np.abs(x)))
    return float(values[-1]), x * (abs(x[k]) / x[k])


def _unit_basis(columns: np.ndarray, tol: float) -> bool:
    gram = columns.conj().T @ columns
    return linalg.min_eigenvalue(gram) > tol


def criterion_disjoint_bases(
    rho: DensityMatrix, p: Povm, q: Povm, tol: float = CRITERION_TOL
) -> Optional[DisjointCriterionCertificate]:
    """Look for the disjoint-bases steering certificate generated by ``P`` and ``Q``.

    Succeeds when every conditional state ``tr_A[(P_i (x) 1) rho]`` is rank
    one, ``c_i |e_i><e_i|``, likewise ``d_i |f_i><f_i|`` for ``Q``, all
    ``c_i d_i > tol``, the ``e_i`` and the ``f_i`` each span Bob's space,
    and no ``e_i`` is parallel to an ``f_j``.  A certificate proves
    steerability for every measurement assemblage containing ``P`` and ``Q``.
    ``None`` means only that this criterion does not apply.
    """
    if p.dim != q.dim or rho.dim % p.dim:
        return None
    db = rho.dim // p.dim
    if p.outcomes != db or q.outcomes != db:
        return None
    sigma = assemblage_of(rho, MeasurementAssemblage.from_povms([p, q]))
    parts = []
    for x in range(2):
        found = [rank_one_part(sigma.members[x, i], tol) for i in range(db)]
        if any(item is None for item in found):
            return None
        parts.append(found)
    c = np.array([item[0] for item in parts[0]])
    d = np.array([item[0] for item in parts[1]])
    if np.any(c * d <= tol):
        return None
    e = np.stack([item[1] for item in parts[0]], axis=1)
    f = np.stack([item[1] for item in parts[1]], axis=1)
    if not (_unit_basis(e, tol) and _unit_basis(f, tol)):
        return None
    if not is_disjoint(e, f, 1e-9):
        return None
    return DisjointCriterionCertificate(e=e, f=f, c=c, d=d, p=p, q=q)


def steering_measurements_for_pure(
    psi: DensityMatrix,
    dims: Optional[tuple[int, int]] = None,
    rank_tol: float = linalg.RANK_TOL,
) -> tuple[Povm, Povm]:
    """Two projective measurements for Alice that make a pure state steerable.

    With Schmidt form ``sum_i mu_i |eps_i>|eta_i>`` and ``U`` any unitary
    sending the canonical basis to ``eps`` (completed if the Schmidt rank is
    below ``d_A``), the pair is ``P = {U|i><i|U^dagger}`` and
    ``Q = {U F|j><j|F^dagger U^dagger}`` with ``F`` the Fourier transform.

    Raises
    ------
    NotEntangledError
        If the Schmidt rank is 1.
    """
    if dims is None:
        n = int(round(np.sqrt(psi.dim)))
        if n * n != psi.dim:
            raise DomainError("pass dims for a non-square bipartition")
        dims = (n, n)
    dim_a, dim_b = dims
    vec = pure_vector(psi)
    decomposition = linalg.schmidt(vec, dim_a, dim_b, rank_tol)
    if decomposition.rank < 2:
        raise NotEntangledError("state has Schmidt rank 1")
    u = linalg.complete_basis(decomposition.basis_a)
    p = Povm.from_basis(Basis(u))
    q = Povm.from_basis(Basis(u @ fourier_basis(dim_a).columns))
    return p, q
