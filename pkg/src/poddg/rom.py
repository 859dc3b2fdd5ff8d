"""POD-DG reduced model: offline operator assembly and the online CNAB stepper.

The reduced model replaces the upwind flux by the central flux so that
convection becomes trilinear, and the HDG viscous form by a symmetric
interior penalty DG form. Both are evaluated once on the POD basis
(offline); the online stage only touches ``r``-sized arrays.

Index convention for the offline matrices and tensor: the last index is
the test function. ``B[i, j] = B_dg(phi_i, phi_j)``,
``C[i, k, j] = C(phi_i, phi_k, phi_j)``, and the reduced equation for mode
``j`` reads ``sum_i M[i, j] a_i`` for any matrix ``M``.
"""

from dataclasses import dataclass

import numpy as np

from .discretization import FeField, facet_traces, legendre_all
from .fom import _kernel
from .linalg import DenseLU, LinAlgFailure

__all__ = [
    "MODELS",
    "RomOperators",
    "RomState",
    "RomTrajectory",
    "OnlineSystem",
    "central_convection",
    "central_convection_vector",
    "dg_viscous",
    "dg_viscous_apply",
    "facet_jumps",
    "build_offline",
    "project_initial",
    "rom_step",
    "run_rom",
]

MODELS = ("plain", "c", "cd")
MAX_RANK = 100


def _coeffs(f):
    return f.coeffs if isinstance(f, FeField) else np.asarray(f, dtype=float)


def facet_jumps(coeffs):
    """``left - right`` trace difference at every facet."""
    left, right = facet_traces(coeffs)
    return left - right


def central_convection_vector(w, u):
    """``C(w, u, v)`` against every test basis function, with the central flux.

    ``-1/2 sum_K (int_K w u v' - int_dK avg(w) avg(u) n v)``. Leading batch
    axes broadcast.
    """
    wc, uc = _coeffs(w), _coeffs(u)
    kern = _kernel(wc.shape[-1] - 1)
    wl, wr = facet_traces(wc)
    ul, ur = facet_traces(uc)
    flux = 0.125 * (wl + wr) * (ul + ur)
    return kern.volume(wc, uc) + kern.distribute(flux)


def central_convection(w, u, v):
    w.check_compatible(u)
    w.check_compatible(v)
    return float(np.sum(central_convection_vector(w, u) * v.coeffs))


class _SipTables:
    def __init__(self, mesh, k):
        h = mesh.h
        _, dP_right = legendre_all(k, 1.0)
        P_left, dP_left = legendre_all(k, -1.0)
        self.k = k
        self.scale = 2.0 / h
        self.dP_right = self.scale * dP_right
        self.dP_left = self.scale * dP_left
        self.P_left = P_left
        # int_K u'v' dx = (2/h) int P_i' P_j' dxi = (2/h) * sum over shared-parity pairs
        i = np.arange(k + 1)
        lo = np.minimum.outer(i, i)
        self.stiff = self.scale * np.where((i[:, None] + i[None, :]) % 2 == 0, lo * (lo + 1), 0.0)
        # each facet is seen from both neighbouring elements
        self.penalty = 2.0 * 4.0 * k * k / h


def dg_viscous_apply(u, mesh=None):
    """Symmetric interior penalty form ``B_dg(u, v)`` against every test basis function.

    ``sum_K int u'v' - sum_F ({u'}[v] + {v'}[u]) + sum_K int_dK (4k^2/h) [u][v]``
    where the jump is ``left - right`` trace and the last sum visits every
    facet twice.
    """
    if isinstance(u, FeField):
        mesh = u.mesh
    uc = _coeffs(u)
    t = _SipTables(mesh, uc.shape[-1] - 1)
    left, right = facet_traces(uc)
    dleft = np.roll(uc @ t.dP_right, 1, axis=-1)
    dright = uc @ t.dP_left
    jump = left - right
    avg_d = 0.5 * (dleft + dright)
    # facet coefficients multiplying the test jump and the test derivative average
    cj = -avg_d + t.penalty * jump
    cd = -0.5 * jump
    out = uc @ t.stiff.T
    nxt = np.roll(cj, -1, axis=-1)[..., None]
    out += nxt + np.roll(cd, -1, axis=-1)[..., None] * t.dP_right
    out += -cj[..., None] * t.P_left + cd[..., None] * t.dP_left
    return out


def dg_viscous(u, v):
    u.check_compatible(v)
    return float(np.sum(dg_viscous_apply(u) * v.coeffs))


@dataclass(frozen=True, eq=False)
class RomOperators:
    C0: np.ndarray
    B0: np.ndarray
    C1: np.ndarray
    B: np.ndarray
    C: np.ndarray
    CX: np.ndarray
    BX: np.ndarray
    nu: float
    basis: object

    @property
    def r(self):
        return len(self.C0)

    def btilde(self, c1=0.0, c2=0.0):
        """``nu B + c1 CX + c2 BX``; the plain model skips the closure terms entirely."""
        if c1 == 0.0 and c2 == 0.0:
            return self.nu * self.B
        return self.nu * self.B + c1 * self.CX + c2 * self.BX


def build_offline(basis, nu):
    """Evaluate every reduced operator on the POD basis and its mean."""
    r = basis.r
    if r < 1:
        raise ValueError("basis is empty")
    if r > MAX_RANK:
        raise ValueError(f"r={r} exceeds the supported maximum {MAX_RANK}")
    mesh = basis.mesh
    phi = basis.modes
    flat = phi.reshape(r, -1)
    mean = basis.mean.coeffs

    C0 = flat @ central_convection_vector(mean, mean).ravel()
    B0 = flat @ dg_viscous_apply(mean, mesh).ravel()
    B = dg_viscous_apply(phi, mesh).reshape(r, -1) @ flat.T
    C1 = (
        central_convection_vector(mean[None], phi) + central_convection_vector(phi, mean[None])
    ).reshape(r, -1) @ flat.T
    C = np.empty((r, r, r))
    for i in range(r):
        C[i] = central_convection_vector(phi[i][None], phi).reshape(r, -1) @ flat.T
    J = facet_jumps(phi)
    CX = J @ J.T
    BX = B * ((np.arange(1, r + 1) / r) ** 2)[None, :]
    return RomOperators(C0, B0, C1, B, C, CX, BX, float(nu), basis)


def project_initial(u0, basis):
    """``a_j(0) = M(u0 - mean, phi_j)``."""
    return basis.coefficients(u0)


@dataclass(frozen=True)
class RomState:
    a: np.ndarray
    a_prev: np.ndarray
    n: int
    t: float
    model: str = "plain"
    c1: float = 0.0
    c2: float = 0.0


def _closure_constants(model, c1, c2):
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    if c1 < 0 or c2 < 0:
        raise ValueError("closure constants must be non-negative")
    if model == "plain":
        return 0.0, 0.0
    if model == "c":
        return float(c1), 0.0
    return float(c1), float(c2)


class OnlineSystem:
    """CNAB stepper ``(I/dt + Bt/2) a^n = (I/dt - Bt/2) a^{n-1} - explicit``.

    ``Bt`` acts as ``sum_i Btilde[i, j] a_i`` so it enters as the transpose
    of ``Btilde``. The left-hand matrix is factored once.
    """

    def __init__(self, ops, dt, model="plain", c1=0.0, c2=0.0):
        self.ops = ops
        self.dt = dt
        self.model = model
        self.c1, self.c2 = _closure_constants(model, c1, c2)
        r = ops.r
        Bt = ops.btilde(self.c1, self.c2).T
        self.lhs = np.eye(r) / dt + 0.5 * Bt
        self.rhs_mat = np.eye(r) / dt - 0.5 * Bt
        try:
            self.lu = DenseLU(self.lhs)
        except LinAlgFailure as exc:
            raise LinAlgFailure(f"reduced left-hand matrix is singular: {exc}") from None
        self.const = ops.C0 + ops.nu * ops.B0
        self.C1t = ops.C1.T.copy()
        self.Cflat = ops.C.reshape(r, r * r)

    def explicit(self, a_ext):
        r = self.ops.r
        quad = a_ext @ (a_ext @ self.Cflat).reshape(r, r)
        return self.const + self.C1t @ a_ext + quad

    def rhs(self, a, a_prev, n):
        a_ext = a if n == 1 else 1.5 * a - 0.5 * a_prev
        return self.rhs_mat @ a - self.explicit(a_ext)

    def step(self, a, a_prev, n):
        return self.lu.solve(self.rhs(a, a_prev, n))


def rom_step(state, ops, dt, system=None):
    """One online step; pass a prebuilt :class:`OnlineSystem` to reuse its factorisation."""
    if system is None:
        system = OnlineSystem(ops, dt, state.model, state.c1, state.c2)
    n = state.n + 1
    a = system.step(state.a, state.a_prev, n)
    return RomState(a, state.a, n, n * dt, state.model, state.c1, state.c2)


@dataclass
class RomTrajectory:
    times: np.ndarray
    coeffs: np.ndarray  # (n_steps + 1, r)
    basis: object

    def field(self, n):
        return self.basis.reconstruct(self.coeffs[n])

    def fields(self, steps):
        return self.basis.reconstruct(self.coeffs[np.asarray(steps)])


def run_rom(ops, a0, dt, t_end, model="plain", c1=0.0, c2=0.0):
    """Integrate the reduced model from ``a0`` and return every ``a^n``."""
    from .fom import n_steps_for

    m = n_steps_for(t_end, dt)
    system = OnlineSystem(ops, dt, model, c1, c2)
    a0 = np.asarray(a0, dtype=float)
    out = np.empty((m + 1, ops.r))
    out[0] = a0
    a, a_prev = a0, a0
    for n in range(1, m + 1):
        a_new = system.step(a, a_prev, n)
        a_prev, a = a, a_new
        out[n] = a
    if not np.all(np.isfinite(out[-1])):
        raise FloatingPointError("reduced solution blew up")
    return RomTrajectory(dt * np.arange(m + 1), out, ops.basis)
