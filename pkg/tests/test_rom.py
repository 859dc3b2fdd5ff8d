import numpy as np
import pytest

from conftest import random_field
from oracles import central_flux, convection_vector, dense_jump_matrix, dense_sip, fe_space_rom
from poddg.discretization import FeField, build_mesh
from poddg.linalg import LinAlgFailure
from poddg.pod import PodBasis, build_basis
from poddg.rom import (
    OnlineSystem,
    RomOperators,
    RomState,
    build_offline,
    central_convection,
    central_convection_vector,
    dg_viscous,
    dg_viscous_apply,
    project_initial,
    rom_step,
    run_rom,
)


@pytest.fixture(scope="module")
def coarse_basis(coarse_run):
    return build_basis(coarse_run.snapshots, 3)


@pytest.fixture(scope="module")
def coarse_ops(coarse_basis):
    return build_offline(coarse_basis, 1e-2)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_central_convection_matches_oracle(rng, k):
    mesh = build_mesh(0.0, 1.0, 7)
    w, u = random_field(rng, mesh, k), random_field(rng, mesh, k)
    ref = convection_vector(w.coeffs, u.coeffs, mesh.h, central_flux)
    assert np.allclose(central_convection_vector(w, u), ref, atol=1e-13)


def test_central_convection_trilinear(rng, small_mesh):
    w, u, v, z = (random_field(rng, small_mesh, 2) for _ in range(4))
    a = central_convection(w + 2.0 * z, u, v)
    assert a == pytest.approx(central_convection(w, u, v) + 2 * central_convection(z, u, v))
    a = central_convection(w, u - z, v)
    assert a == pytest.approx(central_convection(w, u, v) - central_convection(w, z, v))


def test_central_convection_of_ones_vanishes(small_mesh):
    one = FeField.constant(small_mesh, 2, 1.0)
    assert abs(central_convection(one, one, one)) < 1e-13


@pytest.mark.parametrize("k", [1, 2, 3])
def test_dg_viscous_matches_oracle(rng, k):
    mesh = build_mesh(0.0, 1.0, 6)
    B = dense_sip(6, mesh.h, k)
    u = random_field(rng, mesh, k)
    assert np.allclose(dg_viscous_apply(u).ravel(), B @ u.coeffs.ravel(), atol=1e-10)
    v = random_field(rng, mesh, k)
    assert dg_viscous(u, v) == pytest.approx(dg_viscous(v, u), rel=1e-12)


def test_dg_viscous_constants_in_kernel(small_mesh):
    one = FeField.constant(small_mesh, 2, 1.0)
    assert np.abs(dg_viscous_apply(one)).max() < 1e-12


def test_offline_entries_match_direct_evaluation(coarse_basis, coarse_ops):
    phi = [coarse_basis[i] for i in range(3)]
    mean = coarse_basis.mean
    ops = coarse_ops
    for j in range(3):
        assert ops.C0[j] == pytest.approx(central_convection(mean, mean, phi[j]), abs=1e-12)
        assert ops.B0[j] == pytest.approx(dg_viscous(mean, phi[j]), abs=1e-9)
        for i in range(3):
            c1 = central_convection(mean, phi[i], phi[j]) + central_convection(phi[i], mean, phi[j])
            assert ops.C1[i, j] == pytest.approx(c1, abs=1e-12)
            assert ops.B[i, j] == pytest.approx(dg_viscous(phi[i], phi[j]), abs=1e-9)
            for k in range(3):
                ref = central_convection(phi[i], phi[k], phi[j])
                assert ops.C[i, k, j] == pytest.approx(ref, abs=1e-12)


def test_offline_structure(coarse_basis, coarse_ops):
    ops = coarse_ops
    r = ops.r
    assert np.allclose(ops.B, ops.B.T, atol=1e-10 * np.abs(ops.B).max())
    assert np.linalg.eigvalsh(ops.B).min() >= -1e-10 * np.abs(ops.B).max()
    lam = np.linalg.eigvalsh(ops.CX)
    assert np.array_equal(ops.CX, ops.CX.T)
    assert lam.min() >= -1e-10 * lam.max()
    scale = (np.arange(1, r + 1) / r) ** 2
    assert np.array_equal(ops.BX, ops.B * scale[None, :])
    assert np.array_equal(ops.BX[:, -1], ops.B[:, -1])
    J = dense_jump_matrix(coarse_basis.mesh.n_elems, 2)
    Phi = coarse_basis.modes.reshape(r, -1)
    assert np.allclose(ops.CX, Phi @ J.T @ J @ Phi.T, atol=1e-13)


def test_cx_vanishes_for_continuous_basis():
    # k = 1 fields built from vertex values are continuous
    mesh = build_mesh(0.0, 1.0, 10)
    x = mesh.vertices
    modes = []
    for f in (np.sin(2 * np.pi * x), np.cos(2 * np.pi * x), np.cos(4 * np.pi * x)):
        a, b = f, np.roll(f, -1)
        modes.append(np.stack([0.5 * (a + b), 0.5 * (b - a)], axis=1))
    basis = PodBasis(mesh, 1, np.array(modes), np.ones(3), FeField.zeros(mesh, 1))
    ops = build_offline(basis, 0.1)
    assert np.abs(ops.CX).max() < 1e-15


def test_btilde_symmetry(coarse_ops):
    ops = coarse_ops
    bt = ops.btilde(10.0, 0.0)
    assert np.allclose(bt, bt.T, atol=1e-10 * np.abs(bt).max())
    c2 = 0.3
    bt = ops.btilde(10.0, c2)
    asym = 0.5 * (bt - bt.T)
    assert np.allclose(asym, 0.5 * c2 * (ops.BX - ops.BX.T), atol=1e-12)


def _scalar_ops(C0=0.0, B=1.0, nu=1.0):
    z1 = np.zeros(1)
    z2 = np.zeros((1, 1))
    return RomOperators(
        np.array([C0]), z1, z2, np.array([[B]]), np.zeros((1, 1, 1)), z2, z2, nu, None
    )


def test_scalar_cnab_first_step():
    ops = _scalar_ops()
    state = RomState(np.array([3.0]), np.array([3.0]), 0, 0.0)
    new = rom_step(state, ops, 1.0)
    assert new.a[0] == pytest.approx(1.0, abs=1e-15)
    assert new.n == 1 and new.t == 1.0


def test_closure_zero_equals_plain(coarse_basis, coarse_ops, coarse_run):
    a0 = project_initial(coarse_run.snapshots[0], coarse_basis)
    plain = run_rom(coarse_ops, a0, 1e-3, 0.05, "plain")
    zero = run_rom(coarse_ops, a0, 1e-3, 0.05, "cd", 0.0, 0.0)
    assert np.abs(plain.coeffs - zero.coeffs).max() <= 1e-14 * np.abs(plain.coeffs).max()


def test_model_validation(coarse_ops):
    with pytest.raises(ValueError):
        OnlineSystem(coarse_ops, 1e-3, "upwind")
    with pytest.raises(ValueError):
        OnlineSystem(coarse_ops, 1e-3, "c", c1=-1.0)
    s = OnlineSystem(coarse_ops, 1e-3, "plain", c1=5.0, c2=5.0)
    assert s.c1 == 0.0 and s.c2 == 0.0
    s = OnlineSystem(coarse_ops, 1e-3, "c", c1=5.0, c2=5.0)
    assert s.c2 == 0.0


def test_singular_online_matrix():
    ops = _scalar_ops(B=-2.0)
    with pytest.raises(LinAlgFailure):
        OnlineSystem(ops, 1.0)


def test_rank_limits(coarse_basis):
    with pytest.raises(ValueError):
        build_offline(coarse_basis.truncate(0), 0.1)


def test_fe_space_oracle_short(coarse_run, coarse_ops, coarse_basis):
    a0 = project_initial(coarse_run.snapshots[0], coarse_basis)
    traj = run_rom(coarse_ops, a0, 1e-3, 0.01, "plain")
    ref = fe_space_rom(
        coarse_basis.modes, coarse_basis.mean.coeffs, 1e-2, 1e-3, 10, coarse_basis.mesh.h, a0
    )
    assert np.abs(traj.coeffs - ref).max() <= 1e-10 * np.abs(ref).max()


def test_trajectory_fields(coarse_ops, coarse_basis, coarse_run):
    a0 = project_initial(coarse_run.snapshots[0], coarse_basis)
    traj = run_rom(coarse_ops, a0, 1e-3, 0.01, "c", 1.0)
    assert traj.coeffs.shape == (11, 3) and traj.times[-1] == pytest.approx(0.01)
    f = traj.field(4)
    assert np.allclose(f.coeffs, coarse_basis.reconstruct(traj.coeffs[4]).coeffs)
    assert traj.fields([0, 4]).shape == (2, 64, 3)
