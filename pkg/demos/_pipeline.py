"""Shared driver for the two Burgers demos: FOM, POD, three reduced models, errors."""

import time

import numpy as np

from poddg import io
from poddg.fom import run_fom
from poddg.linalg import sym_eigen
from poddg.metrics import l1_error, l2_error
from poddg.pod import build_basis, correlation_matrix
from poddg.rom import build_offline, project_initial, run_rom

MODELS = [("plain", 0.0, 0.0), ("c", 1e4, 0.0), ("cd", 1e4, 0.01)]
REPORT_TIMES = (0.0, 0.5, 1.0)


def run(config_path, rank=20, outdir=None):
    cfg = io.load_config(config_path)
    print(f"{cfg.n_elems} elements, k={cfg.degree}, nu={cfg.nu:g}, dt={cfg.dt:g}, "
          f"{cfg.n_steps} steps, initial condition '{cfg.ic_kind}'")

    t0 = time.perf_counter()
    fom = run_fom(cfg.fom_config())
    snaps = fom.snapshots
    print(f"full-order run: {time.perf_counter() - t0:.1f}s, {len(snaps)} snapshots, "
          f"energy {fom.energy[0]:.4f} -> {fom.energy[-1]:.4f}")

    eig = sym_eigen(correlation_matrix(snaps))
    basis = build_basis(snaps, rank, eig=eig)
    frac = basis.energy_fractions
    print("energy captured by the leading modes:")
    for r in (1, 5, 10, rank):
        print(f"  r={r:3d}: {100 * frac[r - 1]:.2f}%")

    ops = build_offline(basis, cfg.nu)
    a0 = project_initial(snaps[0], basis)
    idx = [int(round(t / (cfg.dt * cfg.snapshot_stride))) for t in REPORT_TIMES]
    print(f"\n{'model':>6} " + " ".join(f"{'L2 t=' + format(t, 'g'):>10}" for t in REPORT_TIMES)
          + "   L1 t=1")
    rows = []
    for model, c1, c2 in MODELS:
        traj = run_rom(ops, a0, cfg.dt, cfg.t_end, model, c1, c2)
        l2 = [l2_error(traj.field(cfg.sample_steps[i]), snaps[i]) for i in idx]
        l1 = l1_error(traj.field(cfg.sample_steps[-1]), snaps[-1])
        rows.append((model, c1, c2, *l2, l1))
        print(f"{model:>6} " + " ".join(f"{e:10.4g}" for e in l2) + f"   {l1:.4g}")

    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        io.write_csv(outdir / "spectrum.csv", ["index", "lambda", "cumulative_energy_fraction"],
                     zip(range(1, len(frac) + 1), eig.eigenvalues, frac))
        io.write_csv(outdir / "errors.csv",
                     ["model", "c1", "c2"] + [f"l2_t{t:g}" for t in REPORT_TIMES] + ["l1_t1"],
                     rows)
        print(f"\ntables written to {outdir}")
    return rows, np.asarray(frac)
