"""Method-of-snapshots POD in the DG mass inner product."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .discretization import FeField, mass_diagonal
from .linalg import sym_eigen

__all__ = [
    "SnapshotSet",
    "PodBasis",
    "RankError",
    "correlation_matrix",
    "build_basis",
    "energy_fraction",
    "numerical_rank",
]

RANK_CUTOFF = 1e-12


class RankError(ValueError):
    """Requested more modes than the spectrum supports."""

    def __init__(self, requested, usable):
        super().__init__(
            f"requested r={requested} but only {usable} eigenvalues exceed "
            f"{RANK_CUTOFF:g} * lambda_1"
        )
        self.requested = requested
        self.usable = usable


class SnapshotSet:
    """``S`` stored DG fields sharing one mesh and degree.

    Parameters
    ----------
    mesh : Mesh1D
    degree : int
    coeffs : ndarray, shape (S, n_elems, degree + 1)
    times : ndarray, shape (S,)
    """

    def __init__(self, mesh, degree, coeffs, times):
        coeffs = np.asarray(coeffs, dtype=float)
        times = np.asarray(times, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[1:] != (mesh.n_elems, degree + 1):
            raise ValueError(f"snapshot array has shape {coeffs.shape}")
        if times.shape != (coeffs.shape[0],):
            raise ValueError("need one sample time per snapshot")
        self.mesh = mesh
        self.degree = degree
        self.coeffs = coeffs
        self.times = times

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, n):
        return FeField(self.mesh, self.degree, self.coeffs[n])

    @cached_property
    def mean(self):
        return FeField(self.mesh, self.degree, self.coeffs.mean(axis=0))

    @property
    def fluctuations(self):
        return self.coeffs - self.mean.coeffs

    @property
    def mass_weights(self):
        return np.broadcast_to(
            mass_diagonal(self.mesh, self.degree), (self.mesh.n_elems, self.degree + 1)
        ).ravel()


@dataclass(frozen=True, eq=False)
class PodBasis:
    """Leading ``r`` POD modes, the full eigenvalue spectrum and the snapshot mean."""

    mesh: object
    degree: int
    modes: np.ndarray  # (r, n_elems, degree + 1)
    eigenvalues: np.ndarray  # all S eigenvalues, descending
    mean: FeField

    @property
    def r(self):
        return self.modes.shape[0]

    def __getitem__(self, j):
        return FeField(self.mesh, self.degree, self.modes[j])

    @property
    def energy_fractions(self):
        lam = np.maximum(self.eigenvalues, 0.0)
        return np.cumsum(lam) / lam.sum()

    def gram(self):
        w = mass_diagonal(self.mesh, self.degree)
        flat = self.modes.reshape(self.r, -1)
        return (flat * np.tile(w, self.mesh.n_elems)) @ flat.T

    def coefficients(self, field):
        """``a_j = M(field - mean, phi_j)``."""
        field.check_compatible(self.mean)
        w = mass_diagonal(self.mesh, self.degree)
        d = (field.coeffs - self.mean.coeffs) * w
        return self.modes.reshape(self.r, -1) @ d.ravel()

    def reconstruct(self, a):
        """``mean + sum_j a_j phi_j``; ``a`` may carry leading batch axes."""
        a = np.asarray(a, dtype=float)
        fluct = np.tensordot(a, self.modes, axes=([-1], [0]))
        out = self.mean.coeffs + fluct
        if out.ndim == 2:
            return FeField(self.mesh, self.degree, out)
        return out

    def truncate(self, r):
        return PodBasis(self.mesh, self.degree, self.modes[:r], self.eigenvalues, self.mean)


def correlation_matrix(snaps):
    """``C_ij = M(u_i - mean, u_j - mean)`` over all snapshot pairs.

    The modal mass matrix is diagonal, so ``C`` is a weighted Gram matrix.
    Only the upper triangle is computed and mirrored so ``C`` is exactly
    symmetric.
    """
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots")
    X = snaps.fluctuations.reshape(len(snaps), -1)
    C = (X * snaps.mass_weights) @ X.T
    upper = np.triu(C)
    return upper + np.triu(upper, 1).T


def numerical_rank(eigenvalues):
    lam = np.asarray(eigenvalues)
    if lam.size == 0 or lam[0] <= 0:
        return 0
    return int(np.sum(lam > RANK_CUTOFF * lam[0]))


def build_basis(snaps, r, eig=None):
    """First ``r`` POD modes ``phi_j = lambda_j^{-1/2} sum_n w^j_n (u_n - mean)``.

    The sum runs over all snapshots, which is what makes the modes
    orthonormal in the mass inner product.

    Parameters
    ----------
    snaps : SnapshotSet
    r : int
    eig : SymEigen, optional
        Precomputed decomposition of :func:`correlation_matrix`.
    """
    if eig is None:
        eig = sym_eigen(correlation_matrix(snaps))
    lam = eig.eigenvalues
    usable = numerical_rank(lam)
    if int(r) != r or r < 1 or r > usable:
        raise RankError(r, usable)
    W = eig.eigenvectors[:, :r]
    X = snaps.fluctuations.reshape(len(snaps), -1)
    modes = (W.T @ X) / np.sqrt(lam[:r])[:, None]
    modes = modes.reshape(r, snaps.mesh.n_elems, snaps.degree + 1)
    return PodBasis(snaps.mesh, snaps.degree, modes, lam.copy(), snaps.mean)


def energy_fraction(eigenvalues, r):
    """Share of the (non-negative part of the) spectrum held by the first ``r`` values."""
    lam = np.asarray(eigenvalues, dtype=float)
    total = np.maximum(lam, 0.0).sum()
    if total <= 0.0:
        raise ValueError("spectrum is identically zero")
    return float(lam[:r].sum() / total)
