import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poddg.linalg import (
    CyclicBandSystem,
    DenseLU,
    LinAlgFailure,
    factor_cyclic,
    lu_factor,
    lu_solve,
    sym_eigen,
)


def _sym(rng, n):
    A = rng.standard_normal((n, n))
    return A + A.T


def test_sym_eigen_frozen_2x2():
    e = sym_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(e.eigenvalues, [3.0, 1.0], atol=1e-14)
    s = 1 / np.sqrt(2)
    assert np.allclose(e.eigenvectors, [[s, s], [s, -s]], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 60])
def test_sym_eigen_matches_numpy(rng, n):
    A = _sym(rng, n)
    e = sym_eigen(A)
    ref = np.linalg.eigvalsh(A)[::-1]
    assert np.allclose(e.eigenvalues, ref, atol=1e-11 * max(1.0, abs(ref).max()))
    V = e.eigenvectors
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)
    assert np.allclose(A @ V, V * e.eigenvalues, atol=1e-10)


def test_sym_eigen_sorted_and_sign_convention(rng):
    A = _sym(rng, 12)
    e = sym_eigen(A)
    assert np.all(np.diff(e.eigenvalues) <= 0)
    V = e.eigenvectors
    idx = np.argmax(np.abs(V), axis=0)
    assert np.all(V[idx, np.arange(12)] > 0)


def test_sym_eigen_deterministic(rng):
    A = _sym(rng, 30)
    a, b = sym_eigen(A), sym_eigen(A.copy())
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_sym_eigen_diagonal_input():
    e = sym_eigen(np.diag([1.0, 5.0, 3.0]))
    assert np.array_equal(e.eigenvalues, [5.0, 3.0, 1.0])


def test_sym_eigen_rejects_bad_input():
    with pytest.raises(ValueError):
        sym_eigen(np.ones((2, 3)))
    with pytest.raises(ValueError):
        sym_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sym_eigen_spd_nonnegative(rng):
    X = rng.standard_normal((40, 8))
    e = sym_eigen(X @ X.T)
    assert e.eigenvalues.min() >= -1e-10 * e.eigenvalues.max()


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 15), seed=st.integers(0, 2**31 - 1))
def test_sym_eigen_reconstructs(n, seed):
    A = _sym(np.random.default_rng(seed), n)
    e = sym_eigen(A)
    V = e.eigenvectors
    assert np.allclose(V @ np.diag(e.eigenvalues) @ V.T, A, atol=1e-10)


def test_dense_lu_solves(rng):
    A = rng.standard_normal((9, 9)) + 9 * np.eye(9)
    b = rng.standard_normal(9)
    assert np.allclose(DenseLU(A).solve(b), np.linalg.solve(A, b))
    assert np.allclose(lu_solve(lu_factor(A), b), np.linalg.solve(A, b))
    assert np.allclose(lu_solve(A, b), np.linalg.solve(A, b))


def test_dense_lu_needs_pivoting():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(DenseLU(A).solve([2.0, 3.0]), [3.0, 2.0])


def test_dense_lu_singular():
    with pytest.raises(LinAlgFailure):
        DenseLU(np.array([[1.0, 2.0], [2.0, 4.0]]))


def _random_cyclic(rng, n, b):
    shape = (n,) if b == 1 else (n, b, b)
    diag = rng.standard_normal(shape) + (4.0 * (np.eye(b) if b > 1 else 1.0))
    return diag, rng.standard_normal(shape), rng.standard_normal(shape)


@pytest.mark.parametrize("n", [2, 3, 4, 11, 64])
@pytest.mark.parametrize("b", [1, 2, 3])
def test_cyclic_solve_matches_dense(rng, n, b):
    diag, lower, upper = _random_cyclic(rng, n, b)
    sys_ = factor_cyclic(diag, lower, upper)
    A = sys_.to_dense()
    x = rng.standard_normal(n * b)
    assert np.allclose(sys_.matvec(x), A @ x)
    rhs = A @ x
    assert np.allclose(sys_.solve(rhs), x, atol=1e-9)


def test_cyclic_corner_placement():
    n = 4
    s = CyclicBandSystem(np.full(n, 4.0), np.arange(1.0, 5.0), -np.arange(1.0, 5.0))
    A = s.to_dense()
    assert A[0, n - 1] == 1.0  # lower[0] wraps to the last column
    assert A[n - 1, 0] == -4.0  # upper[-1] wraps to the first column
    assert A[2, 1] == 3.0 and A[2, 3] == -3.0


def test_cyclic_constant_coefficient_laplacian_plus_shift(rng):
    n = 1000
    s = factor_cyclic(np.full(n, 2.5), np.full(n, -1.0), np.full(n, -1.0))
    x = rng.standard_normal(n)
    assert np.allclose(s.solve(s.matvec(x)), x, atol=1e-12)


def test_cyclic_singular_raises():
    # periodic Laplacian has the constants in its kernel
    n = 6
    with pytest.raises(LinAlgFailure):
        factor_cyclic(np.full(n, 2.0), np.full(n, -1.0), np.full(n, -1.0))


def test_cyclic_rejects_single_block():
    with pytest.raises(ValueError):
        CyclicBandSystem(np.ones(1), np.ones(1), np.ones(1))
