"""Dense complex linear algebra for small matrices.

Everything here works on plain ``numpy`` arrays of complex dtype.  The
eigensolver is a cyclic Jacobi method applied to the real symmetric
embedding ``[[Re H, -Im H], [Im H, Re H]]`` of a Hermitian matrix, so the
package does not depend on LAPACK's eigenroutines for its verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError, NormalizationError

TOL_HERM = 1e-10
RANK_TOL = 1e-9
MAX_SWEEPS = 100


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-D complex array, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_residual(h) -> float:
    """Largest entrywise deviation ``|H[i,j] - conj(H[j,i])|``."""
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"matrix is not square: {h.shape}")
    if h.size == 0:
        return 0.0
    return float(np.max(np.abs(h - dagger(h))))


def check_hermitian(h, tol: float = TOL_HERM) -> np.ndarray:
    """Validate hermiticity and return the matrix as a complex array."""
    h = as_matrix(h)
    res = hermitian_residual(h)
    if res > tol:
        raise DomainError(f"matrix is not Hermitian (residual {res:.3e})")
    return h


def tensor(a, b) -> np.ndarray:
    """Kronecker product with block layout ``a[i, j] * b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    ra, ca = a.shape
    rb, cb = b.shape
    x = a[:, None, :, None]
    y = b[None, :, None, :]
    # separate real products keep every entry bit-identical to a[i, j] * b[k, l]
    # computed in scalar complex arithmetic (vectorized complex multiply may fuse)
    re = x.real * y.real - x.imag * y.imag
    im = x.real * y.imag + x.imag * y.real
    return (re + 1j * im).reshape(ra * rb, ca * cb)


def partial_trace(m, dim_a: int, dim_b: int, keep: str = "B") -> np.ndarray:
    """Trace out one factor of an operator on ``C^dim_a (x) C^dim_b``.

    ``keep="B"`` returns ``tr_A(m)`` and ``keep="A"`` returns ``tr_B(m)``.
    """
    m = as_matrix(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise DimensionError(
            f"operator of shape {m.shape} does not act on {dim_a}x{dim_b}"
        )
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "B":
        return np.einsum("ikil->kl", t)
    if keep == "A":
        return np.einsum("ikjk->ij", t)
    raise DomainError(f"keep must be 'A' or 'B', got {keep!r}")


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt inner product ``tr(X^dagger Y)``."""
    x = as_matrix(x)
    y = as_matrix(y)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    return complex(np.vdot(x, y))


def _embed(h: np.ndarray) -> np.ndarray:
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _jacobi_symmetric(a: np.ndarray, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi on a stack ``(K, n, n)`` of real symmetric matrices.

    Each matrix stops rotating once its own off-diagonal mass is negligible,
    so the result for one matrix does not depend on what else is in the
    batch.
    """
    a = np.array(a, dtype=float)
    k, n, _ = a.shape
    v = np.broadcast_to(np.eye(n), (k, n, n)).copy()
    if n < 2:
        return np.diagonal(a, axis1=1, axis2=2).copy(), v
    scale = np.sqrt(np.sum(a * a, axis=(1, 2)))
    thresh = np.where(scale > 0, scale, 1.0) * 1e-15
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[:, off_mask] ** 2, axis=1))
        active = off > thresh
        if not np.any(active):
            return np.diagonal(a, axis1=1, axis2=2).copy(), v
        for p, q in pairs:
            apq = a[:, p, q]
            rotate = active & (apq != 0.0)
            if not np.any(rotate):
                continue
            safe = np.where(rotate, apq, 1.0)
            tau = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
            sign = np.where(tau >= 0, 1.0, -1.0)
            t = sign / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(rotate, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            cc = c[:, None]
            ss = s[:, None]
            ap = a[:, :, p].copy()
            aq = a[:, :, q]
            a[:, :, p] = cc * ap - ss * aq
            a[:, :, q] = ss * ap + cc * aq
            ap = a[:, p, :].copy()
            aq = a[:, q, :]
            a[:, p, :] = cc * ap - ss * aq
            a[:, q, :] = ss * ap + cc * aq
            vp = v[:, :, p].copy()
            vq = v[:, :, q]
            v[:, :, p] = cc * vp - ss * vq
            v[:, :, q] = ss * vp + cc * vq
    raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def _complex_from_embedding(w: np.ndarray, u: np.ndarray, n: int):
    """Pick ``n`` orthonormal complex eigenvectors out of the ``2n`` real ones."""
    order = np.argsort(w, kind="stable")
    picked: list[np.ndarray] = []
    for idx in order:
        z = u[:n, idx] + 1j * u[n:, idx]
        for p in picked:
            z = z - np.vdot(p, z) * p
        norm = np.linalg.norm(z)
        # embedded partners (x, y) and (-y, x) collapse onto z and i*z
        if norm > 0.5:
            picked.append(z / norm)
            if len(picked) == n:
                break
    if len(picked) < n:
        raise ConvergenceError("could not recover a complex eigenbasis")
    return np.stack(picked, axis=1)


def hermitian_eigen_batch(hs, tol: float = TOL_HERM, max_sweeps: int = MAX_SWEEPS):
    """Eigendecompose a stack ``(K, n, n)`` of Hermitian matrices.

    Returns ``(values, vectors)`` with ``values`` of shape ``(K, n)`` in
    ascending order and ``vectors[k]`` unitary.
    """
    hs = np.asarray(hs, dtype=complex)
    if hs.ndim != 3 or hs.shape[1] != hs.shape[2]:
        raise DimensionError(f"expected a stack of square matrices, got {hs.shape}")
    if not np.all(np.isfinite(hs)):
        raise DomainError("matrix has non-finite entries")
    k, n, _ = hs.shape
    if k and np.max(np.abs(hs - dagger(hs)), initial=0.0) > tol:
        raise DomainError("matrix is not Hermitian")
    hs = 0.5 * (hs + dagger(hs))
    w, u = _jacobi_symmetric(_embed(hs), max_sweeps)
    values = np.empty((k, n))
    vectors = np.empty((k, n, n), dtype=complex)
    for i in range(k):
        z = _complex_from_embedding(w[i], u[i], n)
        lam = np.real(np.einsum("ji,jk,ki->i", z.conj(), hs[i], z))
        order = np.argsort(lam, kind="stable")
        values[i] = lam[order]
        vectors[i] = z[:, order]
    return values, vectors


def hermitian_eigen(h, tol: float = TOL_HERM, max_sweeps: int = MAX_SWEEPS):
    """Eigenvalues (ascending) and a unitary eigenvector matrix of ``h``.

    Raises
    ------
    DomainError
        If ``h`` is not Hermitian within ``tol``.
    ConvergenceError
        If the Jacobi sweeps do not converge within ``max_sweeps``.
    """
    h = check_hermitian(h, tol)
    if h.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    values, vectors = hermitian_eigen_batch(h[None], tol, max_sweeps)
    return values[0], vectors[0]


def min_eigenvalue(h) -> float:
    return float(hermitian_eigen(h)[0][0])


def is_psd(h, tol: float = 1e-9) -> bool:
    return min_eigenvalue(h) >= -tol


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0]))) <= tol


def gram_schmidt(columns: np.ndarray, drop_tol: float = 1e-10) -> np.ndarray:
    """Modified Gram-Schmidt on the columns, dropping dependent ones."""
    out: list[np.ndarray] = []
    for j in range(columns.shape[1]):
        z = np.array(columns[:, j], dtype=complex)
        for q in out:
            z = z - np.vdot(q, z) * q
        norm = np.linalg.norm(z)
        if norm > drop_tol:
            out.append(z / norm)
    if not out:
        return np.zeros((columns.shape[0], 0), dtype=complex)
    return np.stack(out, axis=1)


def complete_basis(columns: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a unitary, using canonical vectors."""
    n = columns.shape[0]
    full = np.concatenate([columns, np.eye(n, dtype=complex)], axis=1)
    return gram_schmidt(full)[:, :n]


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``psi = sum_i coefficients[i] * basis_a[:, i] (x) basis_b[:, i]``."""

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ai,bi->ab", self.coefficients, self.basis_a, self.basis_b).reshape(-1)


def schmidt(psi, dim_a: int, dim_b: int, rank_tol: float = RANK_TOL) -> SchmidtDecomposition:
    """Schmidt decomposition of a normalized vector on ``C^dim_a (x) C^dim_b``.

    The reduced matrix on the smaller factor is diagonalized and the partner
    vectors are recovered by contracting ``psi`` with each eigenvector.
    Only coefficients above ``rank_tol`` are kept.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != dim_a * dim_b:
        raise DimensionError(f"vector of length {psi.size} is not {dim_a}x{dim_b}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise NormalizationError(f"state vector has norm {norm:.12g}")
    coeff = psi.reshape(dim_a, dim_b)
    swapped = dim_b < dim_a
    if swapped:
        coeff = coeff.T
    reduced = coeff @ coeff.conj().T
    values, vectors = hermitian_eigen(reduced)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    mu = np.sqrt(np.clip(values, 0.0, None))
    keep = mu > rank_tol
    mu = mu[keep]
    small = vectors[:, keep]
    partner = (coeff.T @ small.conj()) / mu
    # re-orthonormalize partners inside each block of equal coefficients
    start = 0
    while start < len(mu):
        stop = start + 1
        while stop < len(mu) and abs(mu[stop] - mu[start]) <= 1e-10:
            stop += 1
        if stop - start > 1:
            block = gram_schmidt(partner[:, start:stop])
            if block.shape[1] == stop - start:
                partner[:, start:stop] = block
        start = stop
    if swapped:
        return SchmidtDecomposition(mu, partner, small)
    return SchmidtDecomposition(mu, small, partner)
