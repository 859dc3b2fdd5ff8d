"""Periodic 1D mesh, Legendre modal basis, Gauss quadrature and DG field containers."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mesh1D",
    "FeField",
    "SkeletonField",
    "QuadRule",
    "build_mesh",
    "legendre_all",
    "legendre_table",
    "gauss_rule",
    "eval_field",
    "project_function",
    "facet_traces",
    "mass_diagonal",
]


@dataclass(frozen=True)
class Mesh1D:
    """Uniform periodic partition of ``[x0, x1]`` into ``n_elems`` cells.

    Facet ``f`` is the vertex ``x0 + f*h``; its left neighbour is element
    ``f - 1`` (wrapping to ``n_elems - 1`` for ``f = 0``) and its right
    neighbour is element ``f``.
    """

    x0: float
    x1: float
    n_elems: int

    @property
    def h(self):
        return (self.x1 - self.x0) / self.n_elems

    @property
    def length(self):
        return self.x1 - self.x0

    @property
    def vertices(self):
        return self.x0 + self.h * np.arange(self.n_elems)

    @property
    def n_facets(self):
        return self.n_elems

    def element_bounds(self, e):
        return self.x0 + e * self.h, self.x0 + (e + 1) * self.h

    def facet_neighbors(self, f):
        """Return ``(left_element, right_element)`` of facet ``f``."""
        return (f - 1) % self.n_elems, f % self.n_elems


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self):
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class FeField:
    """Broken polynomial field; ``coeffs[e, i]`` multiplies ``P_i`` on element ``e``."""

    mesh: Mesh1D
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.mesh.n_elems, self.degree + 1):
            raise ValueError(
                f"coeffs shape {coeffs.shape} does not match "
                f"({self.mesh.n_elems}, {self.degree + 1})"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, mesh, degree):
        return cls(mesh, degree, np.zeros((mesh.n_elems, degree + 1)))

    @classmethod
    def constant(cls, mesh, degree, value):
        c = np.zeros((mesh.n_elems, degree + 1))
        c[:, 0] = value
        return cls(mesh, degree, c)

    def compatible(self, other):
        return self.mesh == other.mesh and self.degree == other.degree

    def check_compatible(self, other):
        if not self.compatible(other):
            raise ValueError(
                "mesh/degree mismatch: "
                f"({self.mesh}, k={self.degree}) vs ({other.mesh}, k={other.degree})"
            )

    def with_coeffs(self, coeffs):
        return FeField(self.mesh, self.degree, coeffs)

    def __add__(self, other):
        self.check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self.check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, alpha):
        return self.with_coeffs(alpha * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)


@dataclass(frozen=True, eq=False)
class SkeletonField:
    """One trace value per periodic vertex."""

    mesh: Mesh1D
    vals: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.vals, dtype=float)
        if vals.shape != (self.mesh.n_facets,):
            raise ValueError(
                f"skeleton field needs {self.mesh.n_facets} values, got {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "vals", vals)


def build_mesh(x0, x1, n_elems):
    if not x1 > x0:
        raise ValueError(f"empty domain: x1={x1} must exceed x0={x0}")
    if int(n_elems) != n_elems or n_elems < 2:
        raise ValueError(f"periodic mesh needs n_elems >= 2, got {n_elems}")
    return Mesh1D(float(x0), float(x1), int(n_elems))


def legendre_all(k, xi):
    """Values and first derivatives of ``P_0..P_k`` at ``xi``.

    ``xi`` may be a scalar or an array; the returned arrays carry a trailing
    axis of length ``k + 1``. Arguments are clamped to ``[-1, 1]``.
    """
    xi = np.clip(np.asarray(xi, dtype=float), -1.0, 1.0)
    vals = np.empty(xi.shape + (k + 1,))
    ders = np.empty(xi.shape + (k + 1,))
    vals[..., 0] = 1.0
    ders[..., 0] = 0.0
    if k >= 1:
        vals[..., 1] = xi
        ders[..., 1] = 1.0
    for n in range(1, k):
        # (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1};  P'_{n+1} = P'_{n-1} + (2n+1) P_n
        vals[..., n + 1] = ((2 * n + 1) * xi * vals[..., n] - n * vals[..., n - 1]) / (n + 1)
        ders[..., n + 1] = ders[..., n - 1] + (2 * n + 1) * vals[..., n]
    return vals, ders


def gauss_rule(q):
    """Gauss-Legendre rule with ``q`` points on ``[-1, 1]``."""
    if q < 1:
        raise ValueError(f"need at least one quadrature point, got {q}")
    i = np.arange(1, q + 1)
    x = -np.cos(np.pi * (i - 0.25) / (q + 0.5))
    for _ in range(100):
        p, dp = legendre_all(q, x)
        dx = p[:, q] / dp[:, q]
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-15:
            break
    _, dp = legendre_all(q, x)
    w = 2.0 / ((1.0 - x**2) * dp[:, q] ** 2)
    return QuadRule(x, w)


def legendre_table(k, rule):
    """``(V, D)`` with ``V[q, i] = P_i(xi_q)`` and ``D[q, i] = P_i'(xi_q)``."""
    return legendre_all(k, rule.nodes)


def mass_diagonal(mesh, k):
    """Diagonal of the elemental modal mass matrix, ``h / (2i + 1)``."""
    return mesh.h / (2.0 * np.arange(k + 1) + 1.0)


def facet_traces(coeffs):
    """Left and right traces at every facet for coefficient arrays ``(..., n, k+1)``.

    ``left[f]`` is the value of element ``f-1`` at its right end, ``right[f]``
    that of element ``f`` at its left end.
    """
    k = coeffs.shape[-1] - 1
    alt = (-1.0) ** np.arange(k + 1)
    right_end = coeffs.sum(axis=-1)
    left_end = coeffs @ alt
    return np.roll(right_end, 1, axis=-1), left_end


def eval_field(f, x):
    """Point evaluation; vertices take the trace from the element on the right."""
    mesh = f.mesh
    x = np.asarray(x, dtype=float)
    e = np.floor((x - mesh.x0) / mesh.h).astype(int)
    e = np.clip(e, 0, mesh.n_elems - 1)
    xi = 2.0 * (x - (mesh.x0 + e * mesh.h)) / mesh.h - 1.0
    vals, _ = legendre_all(f.degree, xi)
    out = np.sum(vals * f.coeffs[e], axis=-1)
    return out if out.ndim else float(out)


def project_function(func, mesh, k, q=None):
    """Elementwise L2 projection of a vectorised callable onto the DG space."""
    rule = gauss_rule(q if q is not None else 2 * k + 2)
    V, _ = legendre_table(k, rule)
    left = mesh.x0 + mesh.h * np.arange(mesh.n_elems)
    x = left[:, None] + 0.5 * mesh.h * (rule.nodes[None, :] + 1.0)
    fx = func(x)
    # coeff_i = (2i+1)/2 * int_{-1}^{1} f P_i dxi
    coeffs = (fx * rule.weights) @ V * (2.0 * np.arange(k + 1) + 1.0) / 2.0
    return FeField(mesh, k, coeffs)
