"""Dense symmetric eigensolver, cyclic block-tridiagonal solver and small dense LU."""

from dataclasses import dataclass

import numba
import numpy as np
from scipy.linalg import lapack

__all__ = [
    "LinAlgFailure",
    "SymEigen",
    "sym_eigen",
    "DenseLU",
    "lu_factor",
    "lu_solve",
    "CyclicBandSystem",
    "factor_cyclic",
]


class LinAlgFailure(RuntimeError):
    """Raised on singular pivots or non-convergence."""


@dataclass(frozen=True)
class SymEigen:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@numba.njit(cache=False)
def _jacobi_sweep(A, Vt):
    """One cyclic-by-row sweep over all ``(p, q)``, ``p < q``; updates in place.

    ``Vt`` accumulates the transposed eigenvector matrix so both inner loops
    run along rows.
    """
    n = A.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = A[p, q]
            if apq == 0.0:
                continue
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            sgn = 1.0 if theta >= 0.0 else -1.0
            t = sgn / (abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            for k in range(n):
                if k == p or k == q:
                    continue
                akp = A[p, k]
                akq = A[q, k]
                A[p, k] = c * akp - s * akq
                A[q, k] = s * akp + c * akq
                A[k, p] = A[p, k]
                A[k, q] = A[q, k]
            A[p, p] -= t * apq
            A[q, q] += t * apq
            A[p, q] = 0.0
            A[q, p] = 0.0
            for k in range(n):
                vpk = Vt[p, k]
                vqk = Vt[q, k]
                Vt[p, k] = c * vpk - s * vqk
                Vt[q, k] = s * vpk + c * vqk


def sym_eigen(A, tol=1e-14, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``.

    Returns
    -------
    SymEigen
        Eigenvalues in descending order (ties keep their diagonal position)
        and eigenvectors as columns. Each eigenvector is signed so that its
        largest-magnitude entry is positive.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    amax = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-10 * amax:
        raise ValueError("matrix is not symmetric")
    A = np.ascontiguousarray(0.5 * (A + A.T))
    Vt = np.eye(n)
    norm = np.linalg.norm(A)

    def off(M):
        return np.linalg.norm(M - np.diag(np.diag(M)))

    if n > 1 and norm > 0.0:
        for sweep in range(max_sweeps + 1):
            if off(A) <= tol * norm:
                break
            if sweep == max_sweeps:
                raise LinAlgFailure(
                    f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                    f"(off-diagonal norm {off(A):.3e}, target {tol * norm:.3e})"
                )
            _jacobi_sweep(A, Vt)

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = Vt.T[:, order]
    if n:
        lead = np.argmax(np.abs(V), axis=0)
        signs = np.sign(V[lead, np.arange(n)])
        signs[signs == 0] = 1.0
        V = V * signs
    return SymEigen(w, V)


class DenseLU:
    """LU factorisation with partial pivoting, ``P A = L U``."""

    def __init__(self, A):
        A = np.array(A, dtype=float)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        perm = np.arange(n)
        scale = np.max(np.abs(A), initial=0.0)
        for j in range(n):
            piv = j + int(np.argmax(np.abs(A[j:, j])))
            if A[piv, j] == 0.0 or abs(A[piv, j]) <= 1e-300 * max(scale, 1.0):
                raise LinAlgFailure(f"matrix is singular: zero pivot in column {j}")
            if piv != j:
                A[[j, piv]] = A[[piv, j]]
                perm[[j, piv]] = perm[[piv, j]]
            A[j + 1 :, j] /= A[j, j]
            A[j + 1 :, j + 1 :] -= np.outer(A[j + 1 :, j], A[j, j + 1 :])
        self.factors = A
        self.perm = perm
        self.n = n

    def solve(self, b):
        LU = self.factors
        y = np.array(b, dtype=float)[self.perm]
        for i in range(1, self.n):
            y[i] -= LU[i, :i] @ y[:i]
        for i in range(self.n - 1, -1, -1):
            y[i] = (y[i] - LU[i, i + 1 :] @ y[i + 1 :]) / LU[i, i]
        return y


def lu_factor(A):
    return DenseLU(A)


def lu_solve(A, b):
    """Solve ``A x = b``; ``A`` may be a matrix or an existing :class:`DenseLU`."""
    lu = A if isinstance(A, DenseLU) else DenseLU(A)
    return lu.solve(b)


def _as_blocks(x, n, b):
    x = np.asarray(x, dtype=float)
    if b == 1 and x.shape == (n,):
        return x.reshape(n, 1, 1)
    return x.reshape(n, b, b)


class CyclicBandSystem:
    """Factored periodic block-tridiagonal matrix.

    Block row ``i`` reads ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]``
    with indices taken modulo ``n_blocks``; ``lower[0]`` and ``upper[-1]`` are
    the periodic corner blocks.

    The corner coupling is split off as a rank-``b`` update ``U V^T`` of an
    open-chain block-tridiagonal matrix ``T`` which is LU-factored once;
    solves then apply the Sherman-Morrison-Woodbury formula.
    """

    def __init__(self, diag, lower, upper):
        diag = np.asarray(diag, dtype=float)
        n = diag.shape[0]
        b = 1 if diag.ndim == 1 else diag.shape[1]
        self.n_blocks, self.block_size = n, b
        self.diag = _as_blocks(diag, n, b)
        self.lower = _as_blocks(lower, n, b)
        self.upper = _as_blocks(upper, n, b)
        if n < 2:
            raise ValueError("cyclic system needs at least two blocks")
        self._dense = None
        if n == 2:
            self._dense = DenseLU(self.to_dense())
            return

        corner_tr = self.lower[0]  # couples row 0 to x[n-1]
        corner_bl = self.upper[-1]  # couples row n-1 to x[0]
        gamma = -self.diag[0]
        try:
            gamma_inv = np.linalg.inv(gamma)
        except np.linalg.LinAlgError:
            raise LinAlgFailure("singular pivot block at index 0") from None
        d = self.diag.copy()
        d[0] = d[0] - gamma
        d[-1] = d[-1] - corner_bl @ gamma_inv @ corner_tr

        U = np.zeros((n, b, b))
        U[0] = gamma
        U[-1] = corner_bl
        # V^T = [I, 0, ..., 0, gamma^{-1} corner_tr]
        self._vt_first = np.eye(b)
        self._vt_last = gamma_inv @ corner_tr

        if b == 1:
            dl = self.lower[1:, 0, 0].copy()
            du = self.upper[:-1, 0, 0].copy()
            dd = d[:, 0, 0].copy()
            dl, dd, du, du2, ipiv, info = lapack.dgttrf(dl, dd, du)
            if info > 0:
                raise LinAlgFailure(f"singular pivot block at index {info - 1}")
            self._gtt = (dl, dd, du, du2, ipiv)
        else:
            self._factor_blocks(d)

        Z = self._open_solve(U.reshape(n * b, b))
        self._Z = Z
        cap = np.eye(b) + self._vt_apply(Z)
        try:
            self._cap = DenseLU(cap)
        except LinAlgFailure:
            raise LinAlgFailure("singular periodic correction (capacitance) matrix") from None

    def _factor_blocks(self, d):
        n, b = self.n_blocks, self.block_size
        piv_inv = np.empty((n, b, b))
        mult = np.zeros((n, b, b))
        cur = d[0]
        for i in range(n):
            if i > 0:
                mult[i] = self.lower[i] @ piv_inv[i - 1]
                cur = d[i] - mult[i] @ self.upper[i - 1]
            if abs(np.linalg.det(cur)) <= 1e-300 or not np.all(np.isfinite(cur)):
                raise LinAlgFailure(f"singular pivot block at index {i}")
            piv_inv[i] = np.linalg.inv(cur)
        self._piv_inv = piv_inv
        self._mult = mult

    def _open_solve(self, rhs):
        """Solve with the open chain ``T``; ``rhs`` has shape ``(n*b,)`` or ``(n*b, m)``."""
        n, b = self.n_blocks, self.block_size
        if b == 1:
            dl, dd, du, du2, ipiv = self._gtt
            x, info = lapack.dgttrs(dl, dd, du, du2, ipiv, rhs)
            if info != 0:
                raise LinAlgFailure(f"tridiagonal solve failed (info={info})")
            return x
        shape = rhs.shape
        y = rhs.reshape((n, b) + shape[1:]).copy()
        for i in range(1, n):
            y[i] -= self._mult[i] @ y[i - 1]
        y[-1] = self._piv_inv[-1] @ y[-1]
        for i in range(n - 2, -1, -1):
            y[i] = self._piv_inv[i] @ (y[i] - self.upper[i] @ y[i + 1])
        return y.reshape(shape)

    def _vt_apply(self, y):
        n, b = self.n_blocks, self.block_size
        return self._vt_first @ y[:b] + self._vt_last @ y[(n - 1) * b :]

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        flat = rhs.reshape(-1)
        if self._dense is not None:
            return self._dense.solve(flat).reshape(rhs.shape)
        y = self._open_solve(flat)
        corr = self._cap.solve(self._vt_apply(y))
        return (y - self._Z @ corr).reshape(rhs.shape)

    def matvec(self, x):
        n, b = self.n_blocks, self.block_size
        xb = np.asarray(x, dtype=float).reshape(n, b)
        out = np.einsum("nij,nj->ni", self.diag, xb)
        out += np.einsum("nij,nj->ni", self.lower, np.roll(xb, 1, axis=0))
        out += np.einsum("nij,nj->ni", self.upper, np.roll(xb, -1, axis=0))
        return out.reshape(np.shape(x))

    def to_dense(self):
        n, b = self.n_blocks, self.block_size
        A = np.zeros((n * b, n * b))
        for i in range(n):
            r = slice(i * b, (i + 1) * b)
            A[r, i * b : (i + 1) * b] += self.diag[i]
            j = (i - 1) % n
            A[r, j * b : (j + 1) * b] += self.lower[i]
            j = (i + 1) % n
            A[r, j * b : (j + 1) * b] += self.upper[i]
        return A


def factor_cyclic(diag, lower, upper):
    """Factor a periodic block-tridiagonal system once for repeated solves.

    ``diag``, ``lower`` and ``upper`` hold one block (or scalar, for block
    size 1) per block row; ``lower[0]`` and ``upper[-1]`` wrap around.
    Two-block systems fall back to a dense LU since the corner blocks then
    coincide with the off-diagonals.
    """
    return CyclicBandSystem(diag, lower, upper)
