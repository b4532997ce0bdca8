"""States, measurements, assemblages and correlation tensors.

Index conventions
-----------------
* A measurement assemblage stores its effects as an array ``(m, o, d, d)``
  indexed ``[x, a]``.
* A conditional-state assemblage stores ``rho_{a|x}`` the same way,
  ``(m, o, d_B, d_B)`` indexed ``[x, a]``.
* A correlation tensor is ``(o_A, o_B, m_A, m_B)`` indexed ``[a, b, x, y]``.
* Bipartite operators act on ``C^d_A (x) C^d_B`` with Alice first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionError, DomainError, NonUnitaryError, NormalizationError

PSD_TOL = 1e-9


def _eigvals(mats: np.ndarray) -> np.ndarray:
    flat = mats.reshape((-1,) + mats.shape[-2:])
    return linalg.hermitian_eigen_batch(flat, tol=1e-8)[0].reshape(mats.shape[:-1])


@dataclass(frozen=True)
class DensityMatrix:
    """A unit-trace positive semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.check_hermitian(self.matrix, tol=1e-9)
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-9:
            raise NormalizationError(f"density matrix has trace {tr:.12g}")
        if linalg.min_eigenvalue(m) < -PSD_TOL:
            raise DomainError("density matrix is not positive semidefinite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-9:
            raise NormalizationError(f"state vector has norm {norm:.12g}")
        return cls(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class Povm:
    """Finite list of PSD effects summing to the identity."""

    effects: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.effects, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2] or e.shape[0] < 1:
            raise DimensionError(f"effects must have shape (o, d, d), got {e.shape}")
        for eff in e:
            linalg.check_hermitian(eff, tol=1e-9)
        if np.min(_eigvals(e)) < -PSD_TOL:
            raise DomainError("POVM effect is not positive semidefinite")
        d = e.shape[1]
        res = np.linalg.norm(e.sum(axis=0) - np.eye(d))
        if res > 1e-9:
            raise DomainError(f"POVM effects sum to identity only within {res:.3e}")
        e = e.copy()
        e.setflags(write=False)
        object.__setattr__(self, "effects", e)

    @property
    def outcomes(self) -> int:
        return self.effects.shape[0]

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @classmethod
    def from_basis(cls, basis: "Basis | np.ndarray") -> "Povm":
        """Rank-one projective measurement onto the columns of a unitary."""
        cols = basis.columns if isinstance(basis, Basis) else np.asarray(basis, dtype=complex)
        return cls(np.einsum("ik,jk->kij", cols, cols.conj()))


@dataclass(frozen=True)
class MeasurementAssemblage:
    """A family of POVMs on one party, padded to a common outcome count."""

    effects: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.effects, dtype=complex)
        if e.ndim != 4 or e.shape[2] != e.shape[3] or e.shape[0] < 1:
            raise DimensionError(f"effects must have shape (m, o, d, d), got {e.shape}")
        for x in range(e.shape[0]):
            Povm(e[x])
        e = e.copy()
        e.setflags(write=False)
        object.__setattr__(self, "effects", e)

    @classmethod
    def from_povms(cls, povms) -> "MeasurementAssemblage":
        povms = [p if isinstance(p, Povm) else Povm(p) for p in povms]
        if not povms:
            raise DomainError("a measurement assemblage needs at least one POVM")
        dims = {p.dim for p in povms}
        if len(dims) != 1:
            raise DimensionError(f"POVMs act on different dimensions {sorted(dims)}")
        d = dims.pop()
        o = max(p.outcomes for p in povms)
        e = np.zeros((len(povms), o, d, d), dtype=complex)
        for x, p in enumerate(povms):
            e[x, : p.outcomes] = p.effects
        return cls(e)

    @property
    def m(self) -> int:
        return self.effects.shape[0]

    @property
    def o(self) -> int:
        return self.effects.shape[1]

    @property
    def dim(self) -> int:
        return self.effects.shape[2]

    def povm(self, x: int) -> Povm:
        return Povm(self.effects[x])


@dataclass(frozen=True)
class Assemblage:
    """Conditional states ``rho_{a|x}`` on Bob's space, stored ``[x, a]``."""

    members: np.ndarray
    tol: float = field(default=1e-8, repr=False)

    def __post_init__(self):
        s = np.asarray(self.members, dtype=complex)
        if s.ndim != 4 or s.shape[2] != s.shape[3]:
            raise DimensionError(f"members must have shape (m, o, d, d), got {s.shape}")
        herm = np.max(np.abs(s - linalg.dagger(s)), initial=0.0)
        if herm > self.tol:
            raise DomainError(f"assemblage member not Hermitian ({herm:.3e})")
        s = 0.5 * (s + linalg.dagger(s))
        if np.min(_eigvals(s)) < -PSD_TOL:
            raise DomainError("assemblage member is not positive semidefinite")
        marg = s.sum(axis=1)
        drift = max(
            (np.linalg.norm(marg[x] - marg[0]) for x in range(1, s.shape[0])), default=0.0
        )
        if drift > self.tol:
            raise DomainError(f"assemblage signals: reduced states differ by {drift:.3e}")
        tr = np.trace(marg[0]).real
        if abs(tr - 1.0) > self.tol:
            raise NormalizationError(f"assemblage has total trace {tr:.12g}")
        s.setflags(write=False)
        object.__setattr__(self, "members", s)

    @property
    def m(self) -> int:
        return self.members.shape[0]

    @property
    def o(self) -> int:
        return self.members.shape[1]

    @property
    def dim(self) -> int:
        return self.members.shape[2]

    def reduced_state(self) -> np.ndarray:
        return self.members[0].sum(axis=0)


@dataclass(frozen=True)
class CorrelationTensor:
    """``P(a, b | x, y)`` stored as ``(o_A, o_B, m_A, m_B)``."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 4:
            raise DimensionError(f"expected a 4-index tensor, got shape {p.shape}")
        if np.min(p, initial=0.0) < -1e-12:
            raise DomainError("negative probability in correlation tensor")
        sums = p.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1.0), initial=0.0) > 1e-9:
            raise NormalizationError("some P(.,.|x,y) block does not sum to 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.probabilities.shape

    def mix(self, other: "CorrelationTensor", t: float) -> "CorrelationTensor":
        return CorrelationTensor(t * self.probabilities + (1 - t) * other.probabilities)


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis given by the columns of a unitary matrix."""

    columns: np.ndarray

    def __post_init__(self):
        u = linalg.as_matrix(self.columns)
        if not linalg.is_unitary(u):
            raise NonUnitaryError("basis columns are not orthonormal")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "columns", u)

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    def vector(self, i: int) -> np.ndarray:
        return self.columns[:, i]

    def conjugate(self) -> "Basis":
        return Basis(self.columns.conj())

    @classmethod
    def computational(cls, n: int) -> "Basis":
        return cls(np.eye(n, dtype=complex))


# -- correlations and assemblages ------------------------------------------


def _bipartite_dims(rho: DensityMatrix, dim_a: int) -> int:
    if dim_a < 1 or rho.dim % dim_a:
        raise DimensionError(f"state of dimension {rho.dim} does not split with d_A={dim_a}")
    return rho.dim // dim_a


def correlations_of(
    rho: DensityMatrix, ma: MeasurementAssemblage, nb: MeasurementAssemblage
) -> CorrelationTensor:
    """``P(a,b|x,y) = tr[(M_{a|x} (x) N_{b|y}) rho]``."""
    if rho.dim != ma.dim * nb.dim:
        raise DimensionError(
            f"state dimension {rho.dim} != {ma.dim} x {nb.dim} of the measurements"
        )
    r = rho.matrix.reshape(ma.dim, nb.dim, ma.dim, nb.dim)
    p = np.einsum("xaji,yblk,ikjl->abxy", ma.effects, nb.effects, r, optimize=True).real
    p[np.abs(p) < 1e-15] = 0.0
    return CorrelationTensor(np.clip(p, 0.0, None))


def assemblage_of(rho: DensityMatrix, ma: MeasurementAssemblage) -> Assemblage:
    """``rho_{a|x} = tr_A[(M_{a|x} (x) 1) rho]``."""
    db = _bipartite_dims(rho, ma.dim)
    r = rho.matrix.reshape(ma.dim, db, ma.dim, db)
    return Assemblage(np.einsum("xaji,ikjl->xakl", ma.effects, r, optimize=True))


def swap_parties(rho: DensityMatrix, dim_a: int, dim_b: int) -> DensityMatrix:
    """Reorder the tensor factors so that Bob becomes the first party."""
    if rho.dim != dim_a * dim_b:
        raise DimensionError(f"state dimension {rho.dim} != {dim_a} x {dim_b}")
    r = rho.matrix.reshape(dim_a, dim_b, dim_a, dim_b).transpose(1, 0, 3, 2)
    return DensityMatrix(r.reshape(rho.dim, rho.dim))


def reduced_states(rho: DensityMatrix, dim_a: int) -> tuple[np.ndarray, np.ndarray]:
    db = _bipartite_dims(rho, dim_a)
    return (
        linalg.partial_trace(rho.matrix, dim_a, db, keep="A"),
        linalg.partial_trace(rho.matrix, dim_a, db, keep="B"),
    )


# -- bases -----------------------------------------------------------------


def fourier_basis(n: int) -> Basis:
    """Columns of the order-``n`` discrete Fourier transform.

    Entry ``(k, j)`` is ``omega**(k*j) / sqrt(n)`` with ``omega = exp(2 pi i / n)``
    (0-based indices).
    """
    if n < 1:
        raise DomainError("Fourier basis needs n >= 1")
    kj = np.outer(np.arange(n), np.arange(n)) % n
    return Basis(np.exp(2j * np.pi * kj / n) / np.sqrt(n))


def is_disjoint(e: Basis | np.ndarray, f: Basis | np.ndarray, tol: float = 1e-9) -> bool:
    """True when no basis vector of ``e`` is parallel to one of ``f``.

    Plain arrays are read as columns of unit vectors.
    """
    ec = e.columns if isinstance(e, Basis) else np.asarray(e, dtype=complex)
    fc = f.columns if isinstance(f, Basis) else np.asarray(f, dtype=complex)
    if ec.shape[0] != fc.shape[0]:
        raise DimensionError(f"bases of dimension {ec.shape[0]} and {fc.shape[0]}")
    overlaps = np.abs(ec.conj().T @ fc)
    return bool(np.all(overlaps < 1.0 - tol))


def transform_basis(u, e: Basis) -> Basis:
    """The basis ``{U e_i}``."""
    return Basis(linalg.as_matrix(u) @ e.columns)


# -- state factories -------------------------------------------------------


def maximally_entangled(n: int) -> DensityMatrix:
    """``|psi> = sum_i |i>|i> / sqrt(n)``."""
    if n < 2:
        raise DomainError("maximally entangled state needs n >= 2")
    psi = np.eye(n, dtype=complex).reshape(-1) / np.sqrt(n)
    return DensityMatrix.from_vector(psi)


def product_state(rho_a, rho_b) -> DensityMatrix:
    return DensityMatrix(linalg.tensor(rho_a, rho_b))


def pure_from_schmidt(mu, basis_a: Basis, basis_b: Basis) -> DensityMatrix:
    """``|psi> = sum_i mu_i |a_i>|b_i>`` as a density matrix."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if np.any(mu < 0):
        raise DomainError("Schmidt coefficients must be nonnegative")
    total = float(np.sum(mu**2))
    if abs(total - 1.0) > 1e-9:
        raise NormalizationError(f"Schmidt coefficients have squared norm {total:.12g}")
    r = len(mu)
    if r > min(basis_a.dim, basis_b.dim):
        raise DimensionError("more Schmidt coefficients than basis vectors")
    psi = np.einsum("i,ai,bi->ab", mu, basis_a.columns[:, :r], basis_b.columns[:, :r])
    return DensityMatrix.from_vector(psi.reshape(-1))


def pure_vector(rho: DensityMatrix) -> np.ndarray:
    """Recover ``|psi>`` from a rank-one density matrix (global phase fixed)."""
    values, vectors = linalg.hermitian_eigen(rho.matrix)
    if values[-1] < 1 - 1e-8:
        raise DomainError(f"state is not pure (largest eigenvalue {values[-1]:.12g})")
    psi = vectors[:, -1]
    k = int(np.argmax(np.abs(psi)))
    return psi * (abs(psi[k]) / psi[k])


# -- local unitaries -------------------------------------------------------


def _check_unitary(u) -> np.ndarray:
    u = linalg.as_matrix(u)
    if not linalg.is_unitary(u):
        raise NonUnitaryError("operator is not unitary within 1e-9")
    return u


def apply_local_unitary(rho: DensityMatrix, u, v) -> DensityMatrix:
    """``(U (x) V) rho (U (x) V)^dagger``."""
    u = _check_unitary(u)
    v = _check_unitary(v)
    if rho.dim != u.shape[0] * v.shape[0]:
        raise DimensionError("unitaries do not match the state dimension")
    w = linalg.tensor(u, v)
    out = w @ rho.matrix @ w.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


def conjugate_assemblage(ma: MeasurementAssemblage, u) -> MeasurementAssemblage:
    """``{U M_{a|x} U^dagger}``."""
    u = _check_unitary(u)
    if u.shape[0] != ma.dim:
        raise DimensionError("unitary does not match measurement dimension")
    e = u @ ma.effects @ u.conj().T
    return MeasurementAssemblage(0.5 * (e + linalg.dagger(e)))


# -- joint measurability ---------------------------------------------------


def smear_parent_povm(parent: Povm, response) -> MeasurementAssemblage:
    """Post-process a parent POVM ``{N_l}`` into ``M_{a|x} = sum_l P(a|x,l) N_l``.

    ``response`` has shape ``(m, o, d_parent)`` holding ``P(a|x, l)``; each
    column ``response[x, :, l]`` must be a probability distribution.
    """
    p = np.asarray(response, dtype=float)
    if p.ndim != 3 or p.shape[2] != parent.outcomes:
        raise DimensionError(
            f"response must have shape (m, o, {parent.outcomes}), got {p.shape}"
        )
    if np.min(p, initial=0.0) < -1e-12 or np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-9:
        raise DomainError("response columns are not probability distributions")
    return MeasurementAssemblage(np.einsum("xal,lij->xaij", p, parent.effects))


# -- random generation (tests, demos) ---------------------------------------


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_pure(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_separable(
    dim_a: int, dim_b: int, terms: int, rng: np.random.Generator
) -> DensityMatrix:
    weights = rng.dirichlet(np.ones(terms))
    m = sum(
        w * linalg.tensor(
            random_density(dim_a, rng, 1).matrix, random_density(dim_b, rng, 1).matrix
        )
        for w in weights
    )
    return DensityMatrix(0.5 * (m + m.conj().T))


def random_projective(n: int, rng: np.random.Generator) -> Povm:
    return Povm.from_basis(random_unitary(n, rng))
