"""Full-order IMEX HDG/DG solver for the periodic 1D viscous Burgers' equation.

Unknowns are the modal DG coefficients ``u`` on every element and one trace
value ``uhat`` per vertex. Convection uses the upwind DG form and is treated
explicitly (Adams-Bashforth), diffusion uses the HDG form with penalty
``4k^2/h`` and is treated by Crank-Nicolson. The element unknowns are
condensed out so each step needs one periodic tridiagonal solve.
"""

from dataclasses import dataclass, field

import numpy as np

from .discretization import (
    FeField,
    SkeletonField,
    build_mesh,
    facet_traces,
    gauss_rule,
    legendre_all,
    legendre_table,
    mass_diagonal,
    project_function,
)
from .linalg import LinAlgFailure, factor_cyclic
from .pod import SnapshotSet

__all__ = [
    "FomConfig",
    "FomState",
    "FomResult",
    "CondensedOperator",
    "mass_apply",
    "upwind_convection",
    "hdg_diffusion_assemble",
    "initial_condition",
    "initial_state",
    "cnab_step",
    "run_fom",
    "n_steps_for",
]


def n_steps_for(t_end, dt):
    """Number of steps ``M = t_end / dt``; rejects ratios that are not integral.

    A few ulps of slack are allowed because e.g. ``1 / 1e-5`` evaluates to
    ``99999.99999999999``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    ratio = t_end / dt
    m = round(ratio)
    if m < 1 or abs(ratio - m) > 4 * np.spacing(float(m)):
        raise ValueError(f"t_end/dt = {ratio!r} is not an integer number of steps")
    return int(m)


@dataclass(frozen=True)
class FomConfig:
    n_elems: int
    degree: int
    nu: float
    dt: float
    t_end: float
    ic: str = "step"
    ic_params: dict = field(default_factory=dict)
    snapshot_stride: int = 1
    x0: float = 0.0
    x1: float = 1.0
    convection: bool = True

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f"degree must be non-negative, got {self.degree}")
        if self.nu < 0:
            raise ValueError(f"nu must be non-negative, got {self.nu}")
        if self.nu > 0 and self.degree < 1:
            raise ValueError("diffusion needs degree >= 1")
        if self.ic not in ("step", "gaussian", "samples"):
            raise ValueError(f"unknown initial condition {self.ic!r}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError(f"snapshot_stride must be a positive integer, got {self.snapshot_stride}")
        m = n_steps_for(self.t_end, self.dt)
        if m % self.snapshot_stride:
            raise ValueError(
                f"snapshot_stride {self.snapshot_stride} does not divide the {m} time steps"
            )
        build_mesh(self.x0, self.x1, self.n_elems)

    @property
    def mesh(self):
        return build_mesh(self.x0, self.x1, self.n_elems)

    @property
    def n_steps(self):
        return n_steps_for(self.t_end, self.dt)

    @property
    def snapshot_count(self):
        return self.n_steps // self.snapshot_stride + 1


@dataclass(frozen=True)
class FomState:
    u: FeField
    u_prev: FeField
    uhat: SkeletonField
    n: int
    t: float


def _coeffs(f):
    return f.coeffs if isinstance(f, FeField) else np.asarray(f, dtype=float)


def mass_apply(u):
    """Mass form against every test basis function, shape ``(n_elems, k+1)``."""
    return u.coeffs * mass_diagonal(u.mesh, u.degree)


class _ConvectionKernel:
    """Quadrature tables for the DG convection forms on one (mesh, degree)."""

    def __init__(self, k):
        rule = gauss_rule(2 * k + 2)
        V, D = legendre_table(k, rule)
        self.V = V
        # -1/2 * int (wu) v' dx = -1/2 * sum_q w_q (wu)(xi_q) P_i'(xi_q); the h factors cancel
        self.DW = -0.5 * (D * rule.weights[:, None])
        self.alt = (-1.0) ** np.arange(k + 1)

    def volume(self, wc, uc):
        return ((wc @ self.V.T) * (uc @ self.V.T)) @ self.DW

    def distribute(self, flux):
        """Facet flux ``F_f`` tested against ``v``: ``+F`` at the right end of the
        left element, ``-F`` at the left end of the right element."""
        return np.roll(flux, -1, axis=-1)[..., None] - flux[..., None] * self.alt


_KERNELS = {}


def _kernel(k):
    if k not in _KERNELS:
        _KERNELS[k] = _ConvectionKernel(k)
    return _KERNELS[k]


def _upwind(wc, uc, kern):
    wl, wr = facet_traces(wc)
    ul, ur = facet_traces(uc)
    avg = 0.5 * (wl + wr)
    upw = np.where(avg >= 0.0, ul, ur)
    return kern.volume(wc, uc) + kern.distribute(0.5 * avg * upw)


def _upwind_self(uc, kern):
    """``C(u, u, .)`` with traces and quadrature values computed once."""
    uq = uc @ kern.V.T
    right_end = uc.sum(axis=1)
    ur = uc @ kern.alt
    ul = np.empty_like(ur)
    ul[0] = right_end[-1]
    ul[1:] = right_end[:-1]
    avg = 0.5 * (ul + ur)
    flux = 0.5 * avg * np.where(avg >= 0.0, ul, ur)
    out = (uq * uq) @ kern.DW
    out[:-1, :] += flux[1:, None]
    out[-1, :] += flux[0]
    out -= flux[:, None] * kern.alt
    return out


def upwind_convection(w, u):
    """Upwind DG convection ``C(w, u, v)`` for every test basis function ``v``.

    The facet value of ``u`` is taken from the element that the averaged
    ``w`` leaves; a zero average picks the left element.
    """
    if isinstance(w, FeField) and isinstance(u, FeField):
        w.check_compatible(u)
    wc, uc = _coeffs(w), _coeffs(u)
    return _upwind(wc, uc, _kernel(wc.shape[-1] - 1))


def _hdg_local(mesh, k):
    """Local HDG diffusion blocks on one element.

    Returns ``(Buu, bL, bR, sigma)``: the element-element block, the coupling
    of each test mode to the trace at the left and right vertex, and the
    per-side penalty ``4k^2/h``.
    """
    h = mesh.h
    sigma = 4.0 * k * k / h
    rule = gauss_rule(2 * k + 2)
    _, D = legendre_table(k, rule)
    Buu = (2.0 / h) * (D.T * rule.weights) @ D
    b = {}
    for end, n in ((-1.0, -1.0), (1.0, 1.0)):
        P, dP = legendre_all(k, end)
        dP = dP * (2.0 / h)
        # consistency -u' n v, symmetry -v' n u, penalty sigma u v
        Buu -= n * (np.outer(P, dP) + np.outer(dP, P))
        Buu += sigma * np.outer(P, P)
        # trial uhat: +v' n uhat - sigma v uhat
        b[end] = n * dP - sigma * P
    return Buu, b[-1.0], b[1.0], sigma


class CondensedOperator:
    """``M/dt + (nu/2) B_hdg`` with the element unknowns eliminated.

    All elements share the same local blocks on a uniform mesh, so one local
    inverse and a constant-coefficient periodic tridiagonal Schur complement
    on the vertices suffice.
    """

    def __init__(self, mesh, k, nu, dt):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if nu < 0:
            raise ValueError(f"nu must be non-negative, got {nu}")
        if nu > 0 and k < 1:
            raise ValueError("diffusion needs degree >= 1")
        self.mesh, self.k, self.nu, self.dt = mesh, k, nu, dt
        n = mesh.n_elems
        self.mdiag = mass_diagonal(mesh, k)
        Buu, bL, bR, sigma = _hdg_local(mesh, k)
        self.Buu, self.bL, self.bR, self.sigma = Buu, bL, bR, sigma
        half = 0.5 * nu
        self.A = np.diag(self.mdiag / dt) + half * Buu
        self.G = half * np.column_stack([bL, bR])
        self.dff = half * 2.0 * sigma
        try:
            self.Ainv = np.linalg.inv(self.A)
        except np.linalg.LinAlgError:
            raise LinAlgFailure("singular local element block") from None
        self.AinvT = self.Ainv.T.copy()
        self._explicit_uu = (np.diag(2.0 * self.mdiag / dt) - self.A).T.copy()
        self.AinvG = self.Ainv @ self.G
        H = self.G.T @ self.AinvG
        self.schur_coeffs = (-H[1, 0], self.dff - H[0, 0] - H[1, 1], -H[0, 1])
        self.schur = None
        if nu > 0:
            lo, di, up = self.schur_coeffs
            self.schur = factor_cyclic(np.full(n, di), np.full(n, lo), np.full(n, up))

    def apply_bhdg(self, u, uhat):
        """Unscaled ``B_hdg((u, uhat), .)`` tested by element modes and vertices."""
        uc, uh = _coeffs(u), np.asarray(getattr(uhat, "vals", uhat), dtype=float)
        ru = uc @ self.Buu.T + uh[:, None] * self.bL + np.roll(uh, -1)[:, None] * self.bR
        rh = uc @ self.bL + np.roll(uc @ self.bR, 1) + 2.0 * self.sigma * uh
        return ru, rh

    def apply(self, u, uhat):
        """Implicit operator ``M/dt + (nu/2) B_hdg`` applied to ``(u, uhat)``."""
        uc = _coeffs(u)
        ru, rh = self.apply_bhdg(uc, uhat)
        half = 0.5 * self.nu
        return uc * (self.mdiag / self.dt) + half * ru, half * rh

    def solve(self, fu, g):
        """Solve the coupled system for ``(u, uhat)`` by static condensation."""
        y = fu @ self.AinvT
        if self.schur is None:
            wl, wr = facet_traces(y)
            return y, 0.5 * (wl + wr)
        t = y @ self.G
        rhs = g - t[:, 0] - np.roll(t[:, 1], 1)
        uh = self.schur.solve(rhs)
        u = y - uh[:, None] * self.AinvG[:, 0] - np.roll(uh, -1)[:, None] * self.AinvG[:, 1]
        return u, uh

    def explicit_rhs(self, u, uh):
        """``(M/dt - (nu/2) B_hdg)`` applied to ``(u, uh)``: the Crank-Nicolson right-hand side."""
        uh_next = np.empty_like(uh)
        uh_next[:-1] = uh[1:]
        uh_next[-1] = uh[0]
        fu = u @ self._explicit_uu - uh[:, None] * self.G[:, 0] - uh_next[:, None] * self.G[:, 1]
        t = u @ self.G
        g = -(t[:, 0] + np.roll(t[:, 1], 1) + self.dff * uh)
        return fu, g

    def to_dense(self):
        """Assembled ``(n(k+1) + n)`` square implicit matrix; element dofs first."""
        n, k = self.mesh.n_elems, self.k
        N = n * (k + 1)
        out = np.zeros((N + n, N + n))
        for j in range(N + n):
            e = np.zeros(N + n)
            e[j] = 1.0
            ru, rh = self.apply(e[:N].reshape(n, k + 1), e[N:])
            out[:, j] = np.concatenate([ru.ravel(), rh])
        return out


def hdg_diffusion_assemble(mesh, k, nu, dt):
    return CondensedOperator(mesh, k, nu, dt)


def _project_step(mesh, k, x_jump=0.5, left=1.0, right=0.0):
    """Exact L2 projection of ``left`` for ``x < x_jump`` and ``right`` otherwise."""
    coeffs = np.zeros((mesh.n_elems, k + 1))
    xl = mesh.x0 + mesh.h * np.arange(mesh.n_elems)
    s = 2.0 * (x_jump - xl) / mesh.h - 1.0
    s[np.abs(s - 1.0) < 1e-12] = 1.0
    s[np.abs(s + 1.0) < 1e-12] = -1.0
    s = np.clip(s, -1.0, 1.0)
    P, _ = legendre_all(k + 1, s)
    i = np.arange(k + 1)
    # int_{-1}^{s} P_i = (P_{i+1}(s) - P_{i-1}(s)) / (2i+1), and s + 1 for i = 0
    lower = np.empty((mesh.n_elems, k + 1))
    lower[:, 0] = s + 1.0
    if k >= 1:
        lower[:, 1:] = (P[:, 2 : k + 2] - P[:, 0:k]) / (2 * i[1:] + 1)
    total = np.zeros(k + 1)
    total[0] = 2.0
    coeffs = (left * lower + right * (total - lower)) * (2 * i + 1) / 2.0
    return FeField(mesh, k, coeffs)


def initial_condition(mesh, k, kind="step", params=None):
    """Project an initial condition onto the DG space.

    ``kind`` is ``"step"`` (params ``x_jump``, ``left``, ``right``),
    ``"gaussian"`` (``amplitude * exp(-width * (x - center)^2)``) or
    ``"samples"`` (params ``func``, a vectorised callable of ``x``).
    """
    params = dict(params or {})
    if kind == "step":
        return _project_step(
            mesh,
            k,
            params.get("x_jump", 0.5),
            params.get("left", 1.0),
            params.get("right", 0.0),
        )
    if kind == "gaussian":
        amp = params.get("amplitude", 1.0)
        center = params.get("center", 0.3)
        width = params.get("width", 200.0)
        return project_function(
            lambda x: amp * np.exp(-width * (x - center) ** 2), mesh, k, q=2 * k + 6
        )
    if kind == "samples":
        return project_function(params["func"], mesh, k, q=params.get("q", 2 * k + 6))
    raise ValueError(f"unknown initial condition {kind!r}")


def initial_state(u0):
    """State at ``n = 0``; the trace is the average of the two adjacent element traces."""
    wl, wr = facet_traces(u0.coeffs)
    return FomState(u0, u0, SkeletonField(u0.mesh, 0.5 * (wl + wr)), 0, 0.0)


def _cnab_arrays(u, u_prev, uh, n, op, convection):
    fu, g = op.explicit_rhs(u, uh)
    if convection:
        ext = u if n == 1 else 1.5 * u - 0.5 * u_prev
        fu -= _upwind_self(ext, _kernel(op.k))
    return op.solve(fu, g)


def cnab_step(state, op, cfg=None, convection=None):
    """Advance one Crank-Nicolson/Adams-Bashforth step.

    The convective argument is ``1.5 u^{n-1} - 0.5 u^{n-2}``, except on the
    first step where ``u^0`` is used.
    """
    if convection is None:
        convection = True if cfg is None else cfg.convection
    n = state.n + 1
    u, uh = _cnab_arrays(
        state.u.coeffs, state.u_prev.coeffs, state.uhat.vals, n, op, convection
    )
    mesh = state.u.mesh
    return FomState(
        FeField(mesh, state.u.degree, u),
        state.u,
        SkeletonField(mesh, uh),
        n,
        n * op.dt,
    )


@dataclass
class FomResult:
    snapshots: SnapshotSet
    energy: np.ndarray
    times: np.ndarray
    final: FomState

    @property
    def steps(self):
        return np.arange(len(self.energy))


def run_fom(cfg, u0=None, progress=None):
    """Integrate to ``cfg.t_end`` and collect every ``snapshot_stride``-th field.

    Parameters
    ----------
    cfg : FomConfig
    u0 : FeField, optional
        Overrides the initial condition named in ``cfg``.
    progress : callable, optional
        Called as ``progress(n, n_steps)`` after each stored snapshot.

    Returns
    -------
    FomResult
        Snapshots (including ``n = 0``) and the discrete energy ``M(u, u)``
        after every step.
    """
    mesh = cfg.mesh
    k = cfg.degree
    if u0 is None:
        u0 = initial_condition(mesh, k, cfg.ic, cfg.ic_params)
    state = initial_state(u0)
    op = hdg_diffusion_assemble(mesh, k, cfg.nu, cfg.dt)
    m = cfg.n_steps
    stride = cfg.snapshot_stride
    count = m // stride + 1
    mdiag = op.mdiag

    snaps = np.empty((count, mesh.n_elems, k + 1))
    snaps[0] = u0.coeffs
    energy = np.empty(m + 1)
    energy[0] = np.sum(u0.coeffs**2 * mdiag)

    u = u0.coeffs
    u_prev = u
    uh = state.uhat.vals
    for n in range(1, m + 1):
        u_new, uh = _cnab_arrays(u, u_prev, uh, n, op, cfg.convection)
        u_prev, u = u, u_new
        with np.errstate(over="ignore", invalid="ignore"):
            energy[n] = np.sum(u * u * mdiag)
        if n % stride == 0:
            snaps[n // stride] = u
            if progress is not None:
                progress(n, m)
        if not np.isfinite(energy[n]):
            raise FloatingPointError(f"solution blew up at step {n}")

    times = cfg.dt * stride * np.arange(count)
    final = FomState(
        FeField(mesh, k, u), FeField(mesh, k, u_prev), SkeletonField(mesh, uh), m, m * cfg.dt
    )
    return FomResult(SnapshotSet(mesh, k, snaps, times), energy, cfg.dt * np.arange(m + 1), final)
