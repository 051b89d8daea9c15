import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ggc.errors import NotHermitian
from ggc.numerics import (
    gram,
    hermitian_eig,
    min_norm_solve,
    null_space,
    orthonormal_basis,
    psd_factor,
    pseudoinverse,
)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_identity_eigenvalues():
    eig = hermitian_eig(np.eye(3))
    assert np.allclose(eig.eigenvalues, [1, 1, 1])


def test_diagonal_eigenpairs():
    eig = hermitian_eig(np.diag([2.0, -1.0]))
    assert np.allclose(eig.eigenvalues, [2, -1])
    assert np.allclose(np.abs(eig.eigenvectors), np.eye(2))


def test_random_hermitian_reconstruction():
    rng = np.random.default_rng(0)
    A = random_complex(rng, 6, 6)
    H = A + A.conj().T
    eig = hermitian_eig(H)
    assert np.linalg.norm(eig.reconstruct() - H) < 1e-10
    assert np.all(np.diff(eig.eigenvalues) <= 0)
    V = eig.eigenvectors
    assert np.allclose(V.conj().T @ V, np.eye(6))


def test_not_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_pinv_zero_and_diagonal():
    assert np.allclose(pseudoinverse(np.zeros((3, 3))), 0)
    assert np.allclose(pseudoinverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))


def test_pinv_path_laplacian():
    L = np.array([[1.0, -1.0], [-1.0, 1.0]])
    Lp = pseudoinverse(L)
    assert np.allclose(Lp, [[0.25, -0.25], [-0.25, 0.25]])
    assert np.allclose(L @ Lp @ L, L)
    d = np.array([1.0, -1.0])
    assert np.isclose((d @ Lp @ d).real, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_penrose_identities(seed):
    rng = np.random.default_rng(seed)
    # rank-deficient general matrix
    A = random_complex(rng, 10, 6) @ random_complex(rng, 6, 10)
    P = pseudoinverse(A)
    scale = np.linalg.norm(A)
    assert np.linalg.norm(A @ P @ A - A) < 1e-9 * scale
    assert np.linalg.norm(P @ A @ P - P) < 1e-9 * np.linalg.norm(P)
    assert np.linalg.norm((A @ P).conj().T - A @ P) < 1e-9
    assert np.linalg.norm((P @ A).conj().T - P @ A) < 1e-9


def test_min_norm_identity_and_split():
    b = np.array([1.0, -2.0, 3.0])
    assert np.allclose(min_norm_solve(np.eye(3), b), b)
    assert np.allclose(min_norm_solve(np.array([[1.0, 1.0]]), np.array([2.0])), [1, 1])


def test_min_norm_orthogonality():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(5, 8))
    b = rng.normal(size=5)
    x = min_norm_solve(A, b)
    N = null_space(A)
    assert np.allclose(N.conj().T @ x, 0, atol=1e-10)
    # 5x8 generic is surjective so the residual vanishes
    assert np.allclose(A @ x, b)
    # rank-deficient case: residual orthogonal to the column space
    A2 = rng.normal(size=(5, 2)) @ rng.normal(size=(2, 8))
    x2 = min_norm_solve(A2, b)
    r = b - A2 @ x2
    assert np.allclose(A2.T @ r, 0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_eigenvalues_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    A = random_complex(rng, 5, 5)
    H = A + A.conj().T
    Q, _ = np.linalg.qr(random_complex(rng, 5, 5))
    lam1 = hermitian_eig(H).eigenvalues
    lam2 = hermitian_eig(Q @ H @ Q.conj().T).eigenvalues
    assert np.allclose(lam1, lam2, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_min_norm_beats_other_solutions(seed):
    rng = np.random.default_rng(seed)
    A = random_complex(rng, 3, 6)
    b = random_complex(rng, 3)
    x = min_norm_solve(A, b)
    N = null_space(A)
    for _ in range(5):
        other = x + N @ random_complex(rng, N.shape[1])
        assert np.allclose(A @ other, b)
        assert np.linalg.norm(x) <= np.linalg.norm(other) + 1e-12


def test_gram_and_factor():
    rng = np.random.default_rng(1)
    V = random_complex(rng, 4, 3)
    G = gram(V)
    assert np.allclose(G[1, 2], np.vdot(V[1], V[2]))
    F = psd_factor(G)
    assert np.allclose(F.conj().T @ F, G)
    with pytest.raises(ValueError):
        psd_factor(-np.eye(2))


def test_orthonormal_basis_drops_dependent_columns():
    rng = np.random.default_rng(2)
    A = random_complex(rng, 6, 3)
    cols = np.column_stack([A, A[:, 0] + 2 * A[:, 1], np.zeros(6)])
    Q = orthonormal_basis(cols)
    assert Q.shape == (6, 3)
    assert np.allclose(Q.conj().T @ Q, np.eye(3))
    assert np.allclose(Q @ (Q.conj().T @ cols), cols)
