"""Dense linear algebra used throughout the package.

Everything is complex by default. Matrices here are small (a few hundred
rows at most), so plain LAPACK calls through numpy are adequate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian

RANK_TOL = 1e-12


@dataclass(frozen=True)
class EigDecomp:
    """Eigenvalues sorted in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    return A


def hermitian_eig(M, tol: float = 1e-10) -> EigDecomp:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    M : array_like
        Square matrix with ``||M - M^H|| <= tol * ||M||``.
    tol : float
        Relative Hermiticity tolerance.

    Returns
    -------
    EigDecomp
        Real eigenvalues in descending order and orthonormal eigenvectors.
    """
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise NotHermitian(f"matrix is not square: {A.shape}")
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.conj().T) > tol * max(scale, 1e-300):
        raise NotHermitian("matrix differs from its adjoint beyond tolerance")
    vals, vecs = np.linalg.eigh((A + A.conj().T) / 2)
    order = np.argsort(vals)[::-1]
    return EigDecomp(vals[order], vecs[:, order])


def is_hermitian(M, tol: float = 1e-10) -> bool:
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    return np.linalg.norm(A - A.conj().T) <= tol * max(np.linalg.norm(A), 1e-300)


def pseudoinverse(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse.

    Hermitian positive semidefinite inputs (Laplacians, Gram matrices) go
    through an eigendecomposition; everything else through the SVD. Spectral
    values below ``rank_tol`` times the largest one are treated as zero.
    """
    A = as_matrix(M)
    if A.size == 0:
        return np.zeros((A.shape[1], A.shape[0]), dtype=complex)
    if A.shape[0] == A.shape[1] and is_hermitian(A, 1e-12):
        eig = hermitian_eig(A, 1e-12)
        lam = eig.eigenvalues
        top = np.max(np.abs(lam)) if lam.size else 0.0
        if top == 0.0:
            return np.zeros_like(A)
        if lam[-1] >= -rank_tol * top:
            keep = lam > rank_tol * top
            V = eig.eigenvectors[:, keep]
            return (V / lam[keep]) @ V.conj().T
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[1], A.shape[0]), dtype=complex)
    keep = s > rank_tol * s[0]
    return (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T


def min_norm_solve(A, b, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Minimal-norm least-squares solution ``A^+ b``.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    A = as_matrix(A)
    rhs = np.asarray(b, dtype=complex)
    vector = rhs.ndim == 1
    if vector:
        rhs = rhs[:, None]
    if A.size == 0:
        out = np.zeros((A.shape[1], rhs.shape[1]), dtype=complex)
    else:
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            out = np.zeros((A.shape[1], rhs.shape[1]), dtype=complex)
        else:
            keep = s > rank_tol * s[0]
            out = Vh[keep].conj().T @ ((U[:, keep].conj().T @ rhs) / s[keep][:, None])
    return out[:, 0] if vector else out


def gram(vectors) -> np.ndarray:
    """Gram matrix ``G[i, j] = <v_i | v_j>`` of the rows of ``vectors``."""
    V = np.asarray(vectors, dtype=complex)
    return V.conj() @ V.T


def cross_gram(left, right) -> np.ndarray:
    """``G[i, j] = <l_i | r_j>`` for row-stacked vectors."""
    return np.asarray(left, dtype=complex).conj() @ np.asarray(right, dtype=complex).T


def psd_factor(M, clip: float = 1e-10) -> np.ndarray:
    """Return ``F`` with ``M = F^H F`` for a Hermitian PSD matrix.

    Eigenvalues in ``(-clip, 0)`` are zeroed; anything more negative raises.
    """
    eig = hermitian_eig(M, 1e-8)
    lam = eig.eigenvalues.copy()
    if lam.size and lam[-1] < -clip:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {lam[-1]:.3e}")
    lam[lam < 0] = 0.0
    return np.sqrt(lam)[:, None] * eig.eigenvectors.conj().T


def orthonormal_basis(vectors, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as columns) of the span of the given columns.

    Gram-Schmidt with a second orthogonalisation pass per vector ("twice is
    enough"). Vectors whose residual falls below ``rel_tol`` times the
    largest input norm are dropped.
    """
    A = np.asarray(vectors, dtype=complex)
    if A.ndim == 1:
        A = A[:, None]
    n, k = A.shape
    Q = np.zeros((n, min(n, k)), dtype=complex)
    if k == 0:
        return Q
    scale = max(np.max(np.linalg.norm(A, axis=0)), 1e-300)
    r = 0
    for j in range(k):
        v = A[:, j].copy()
        for _ in range(2):
            v -= Q[:, :r] @ (Q[:, :r].conj().T @ v)
        norm = np.linalg.norm(v)
        if norm > rel_tol * scale:
            Q[:, r] = v / norm
            r += 1
            if r == n:
                break
    return Q[:, :r]


def null_space(A, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the kernel of ``A`` (columns)."""
    A = as_matrix(A)
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=complex)
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > rank_tol * max(top, 1e-300))) if top > 0 else 0
    return Vh[rank:].conj().T
