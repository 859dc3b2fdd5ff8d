"""Command-line driver: ``poddg fom | pod | rom | compare``.

Exit codes: 0 success, 2 invalid config or flags, 3 solver failure,
4 requested rank above the numerical rank, 5 unreadable or corrupted
snapshot file, 6 grid or time mismatch between two trajectories.
"""

import argparse
import sys

import numpy as np

from . import io
from .fom import initial_condition, run_fom
from .linalg import LinAlgFailure
from .metrics import error_series, l2_error
from .pod import RankError, build_basis, correlation_matrix, numerical_rank
from .linalg import sym_eigen
from .rom import MAX_RANK, build_offline, project_initial, run_rom

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_RANK = 4
EXIT_FORMAT = 5
EXIT_GRID = 6


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _err(msg):
    print(f"poddg: {msg}", file=sys.stderr)


def _read(path, reader=io.read_snapshots):
    try:
        return reader(path)
    except OSError as exc:
        raise CliError(EXIT_FORMAT, f"cannot read {path}: {exc.strerror}") from None
    except io.SnapshotFormatError as exc:
        raise CliError(EXIT_FORMAT, f"{path}: {exc}") from None


def _config(path):
    try:
        return io.load_config(path)
    except io.ConfigError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None


def cmd_fom(args):
    cfg = _config(args.config)
    try:
        res = run_fom(cfg.fom_config())
    except (LinAlgFailure, FloatingPointError) as exc:
        raise CliError(EXIT_SOLVER, f"full-order solve failed: {exc}") from None
    io.write_snapshot_set(args.out, res.snapshots)
    if args.energy:
        steps = np.arange(len(res.energy))
        io.write_csv(
            args.energy, ["step", "t", "energy"], zip(steps, res.times, res.energy)
        )
    print(f"wrote {len(res.snapshots)} snapshots to {args.out}")
    return EXIT_OK


def cmd_pod(args):
    if args.rank < 1:
        raise CliError(EXIT_CONFIG, f"--rank must be at least 1, got {args.rank}")
    if args.rank > MAX_RANK:
        raise CliError(EXIT_CONFIG, f"--rank {args.rank} exceeds the supported maximum {MAX_RANK}")
    rec = _read(args.snapshots)
    try:
        snaps = io.snapshot_set_from_record(rec)
    except io.SnapshotFormatError as exc:
        raise CliError(EXIT_FORMAT, f"{args.snapshots}: {exc}") from None
    try:
        eig = sym_eigen(correlation_matrix(snaps))
    except LinAlgFailure as exc:
        raise CliError(EXIT_SOLVER, f"eigensolver failed: {exc}") from None
    try:
        basis = build_basis(snaps, args.rank, eig=eig)
    except RankError as exc:
        raise CliError(EXIT_RANK, str(exc)) from None
    io.write_basis(args.basis_out, basis)
    if args.spectrum:
        lam = eig.eigenvalues
        cum = basis.energy_fractions
        io.write_csv(
            args.spectrum,
            ["index", "lambda", "cumulative_energy_fraction"],
            zip(range(1, len(lam) + 1), lam, cum),
        )
    frac = basis.energy_fractions[args.rank - 1]
    print(
        f"r={args.rank} of {numerical_rank(eig.eigenvalues)} usable modes; "
        f"energy fraction {frac:.6f}"
    )
    return EXIT_OK


def _closure_args(args):
    if args.model == "plain":
        if args.c1 is not None or args.c2 is not None:
            print("poddg: warning: --c1/--c2 are ignored for model plain", file=sys.stderr)
        return 0.0, 0.0
    sweeping = args.sweep_c1 is not None
    if not sweeping and (args.c1 is None or args.c1 <= 0):
        raise CliError(EXIT_CONFIG, f"model {args.model} needs --c1 > 0")
    if args.model == "c":
        if args.c2 is not None and args.c2 != 0:
            raise CliError(EXIT_CONFIG, "model c takes no --c2; use model cd")
        return args.c1 or 0.0, 0.0
    if args.c2 is None or args.c2 <= 0:
        raise CliError(EXIT_CONFIG, "model cd needs --c2 > 0")
    return args.c1 or 0.0, args.c2


def _parse_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(EXIT_CONFIG, f"--sweep-c1 expects comma-separated numbers, got {text!r}")
    if not vals or any(v <= 0 for v in vals):
        raise CliError(EXIT_CONFIG, "--sweep-c1 values must be positive")
    return vals


def _check_grid(a_elems, a_deg, b_elems, b_deg, what):
    if (a_elems, a_deg) != (b_elems, b_deg):
        raise CliError(
            EXIT_GRID,
            f"{what}: {a_elems} elements of degree {a_deg} vs {b_elems} of degree {b_deg}",
        )


def cmd_rom(args):
    cfg = _config(args.config)
    c1, c2 = _closure_args(args)
    sweep = None
    if args.sweep_c1 is not None:
        if args.model == "plain":
            raise CliError(EXIT_CONFIG, "--sweep-c1 needs model c or cd")
        if not args.fom:
            raise CliError(EXIT_CONFIG, "--sweep-c1 needs --fom for the reference solution")
        sweep = _parse_list(args.sweep_c1)
    basis = _read(args.basis, lambda p: io.read_basis(p, cfg.x0, cfg.x1))
    if (basis.mesh.n_elems, basis.degree) != (cfg.n_elems, cfg.degree):
        raise CliError(
            EXIT_CONFIG,
            f"config field 'n_elems'/'degree' ({cfg.n_elems}, {cfg.degree}) does not "
            f"match the basis ({basis.mesh.n_elems}, {basis.degree})",
        )
    ops = build_offline(basis, cfg.nu)
    u0 = initial_condition(cfg.mesh, cfg.degree, cfg.ic_kind, cfg.ic_params)
    a0 = project_initial(u0, basis)
    steps = cfg.sample_steps

    def solve(c1_):
        try:
            return run_rom(ops, a0, cfg.dt, cfg.t_end, args.model, c1_, c2)
        except (LinAlgFailure, FloatingPointError) as exc:
            raise CliError(EXIT_SOLVER, f"reduced solve failed: {exc}") from None

    if sweep is not None:
        ref = _read(args.fom)
        _check_grid(ref.n_elems, ref.degree, cfg.n_elems, cfg.degree, "sweep reference")
        final = io.snapshot_set_from_record(ref, cfg.x0, cfg.x1)[len(ref.tags) - 1]
        rows = []
        for val in sweep:
            traj = solve(val)
            rows.append((val, l2_error(traj.field(steps[-1]), final)))
        print("c1,final_l2")
        for val, err in rows:
            print(f"{val:g},{err:.4g}")
        if args.sweep_out:
            io.write_csv(args.sweep_out, ["c1", "final_l2"], rows)
        return EXIT_OK

    traj = solve(c1)
    coeffs = traj.coeffs[steps]
    times = traj.times[steps]
    if args.coeffs:
        header = ["step", "t"] + [f"a_{j}" for j in range(1, ops.r + 1)]
        io.write_csv(
            args.coeffs,
            header,
            ([int(s), t, *a] for s, t, a in zip(steps, times, coeffs)),
        )
    if args.fields:
        io.write_snapshots(args.fields, basis.reconstruct(coeffs), times)
    print(f"model {args.model}: {len(steps)} samples, r={ops.r}")
    return EXIT_OK


def cmd_compare(args):
    fom = _read(args.fom)
    rom = _read(args.rom)
    _check_grid(fom.n_elems, fom.degree, rom.n_elems, rom.degree, "grid mismatch")
    if fom.count != rom.count:
        raise CliError(EXIT_GRID, f"sample counts differ: {fom.count} vs {rom.count}")
    a = io.snapshot_set_from_record(fom)
    b = io.snapshot_set_from_record(rom)
    try:
        series = error_series(a, b)
    except ValueError as exc:
        raise CliError(EXIT_GRID, str(exc)) from None
    io.write_csv(args.out, ["t", "l2", "l1"], series.rows())
    print(f"t={series.times[-1]:.4g} L2={series.l2[-1]:.4g} L1={series.l1[-1]:.4g}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="poddg", description="POD-DG reduced models for 1D Burgers")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fom", help="run the full-order solver and store snapshots")
    f.add_argument("--config", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--energy")
    f.set_defaults(func=cmd_fom)

    q = sub.add_parser("pod", help="build a POD basis from a snapshot file")
    q.add_argument("--snapshots", required=True)
    q.add_argument("--rank", type=int, required=True)
    q.add_argument("--basis-out", required=True)
    q.add_argument("--spectrum")
    q.set_defaults(func=cmd_pod)

    r = sub.add_parser("rom", help="integrate a reduced model")
    r.add_argument("--basis", required=True)
    r.add_argument("--config", required=True)
    r.add_argument("--model", choices=["plain", "c", "cd"], default="plain")
    r.add_argument("--c1", type=float)
    r.add_argument("--c2", type=float)
    r.add_argument("--coeffs")
    r.add_argument("--fields")
    r.add_argument("--sweep-c1", help="comma-separated c1 values")
    r.add_argument("--fom", help="full-order snapshot file, reference for --sweep-c1")
    r.add_argument("--sweep-out", help="optional CSV copy of the sweep table")
    r.set_defaults(func=cmd_rom)

    c = sub.add_parser("compare", help="L2/L1 error series between two snapshot files")
    c.add_argument("--fom", required=True)
    c.add_argument("--rom", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except CliError as exc:
        _err(str(exc))
        return exc.code
    except RankError as exc:
        _err(str(exc))
        return EXIT_RANK
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
