"""Tune the jump-penalty constant c1 with the command-line pipeline.

Runs ``poddg fom``, ``poddg pod`` and ``poddg rom --sweep-c1`` in sequence,
leaving every intermediate file (snapshots, basis, spectrum, sweep table) in
the work directory. The sweep reports the final-time L2 error of the C model
for each c1. The useful range shifts with the mesh: the POD modes have
smaller inter-element jumps on finer meshes, so CX shrinks and c1 must grow
to have the same effect.

    python demos/closure_sweep.py [--full] [--work DIR] [--c1 LIST]
"""

import argparse
import sys
import tempfile
from pathlib import Path

from poddg.cli import main

HERE = Path(__file__).parent


def step(argv):
    print("$ poddg " + " ".join(argv), flush=True)
    code = main(argv)
    if code:
        sys.exit(code)


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--full", action="store_true")
    p.add_argument("--work", type=Path)
    p.add_argument("--c1", default="10,100,1000,10000,100000")
    p.add_argument("--model", default="c", choices=["c", "cd"])
    args = p.parse_args()

    cfg = str(HERE / "configs" / ("example1.json" if args.full else "example1_scaled.json"))
    work = args.work or Path(tempfile.mkdtemp(prefix="poddg-sweep-"))
    work.mkdir(parents=True, exist_ok=True)
    w = lambda name: str(work / name)  # noqa: E731

    step(["fom", "--config", cfg, "--out", w("snapshots.bin"), "--energy", w("energy.csv")])
    step(["pod", "--snapshots", w("snapshots.bin"), "--rank", "20",
          "--basis-out", w("basis.bin"), "--spectrum", w("spectrum.csv")])
    extra = ["--c2", "0.01"] if args.model == "cd" else []
    step(["rom", "--basis", w("basis.bin"), "--config", cfg, "--model", args.model, *extra,
          "--sweep-c1", args.c1, "--fom", w("snapshots.bin"), "--sweep-out", w("sweep.csv")])
    step(["rom", "--basis", w("basis.bin"), "--config", cfg, "--model", "plain",
          "--fields", w("plain.bin"), "--coeffs", w("plain_coeffs.csv")])
    step(["compare", "--fom", w("snapshots.bin"), "--rom", w("plain.bin"),
          "--out", w("plain_errors.csv")])
    print(f"files in {work}")
