"""Viscous Burgers with a step initial condition: a shock forms and travels.

The full-order HDG/DG solver produces 501 snapshots on [0, 1]. A 20-mode
POD basis then drives three reduced models:

* plain: central flux only, no closure;
* C: adds the jump penalty ``c1 * CX`` with c1 = 1e4;
* CD: adds the eddy viscosity ``c2 * BX`` with c2 = 0.01 on top.

The table compares each against the full-order snapshots at t = 0, 0.5, 1.
The t = 0 column is the POD projection error of the initial condition.

By default this runs the 1,000-element case (about a minute). ``--full``
runs the 10,000-element case with dt = 1e-5 (about six minutes).

    python demos/example1_step.py [--full] [--out DIR]
"""

import argparse
from pathlib import Path

from _pipeline import run

HERE = Path(__file__).parent

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--full", action="store_true", help="10,000 elements, dt = 1e-5")
    p.add_argument("--out", type=Path, help="directory for spectrum.csv and errors.csv")
    args = p.parse_args()
    name = "example1.json" if args.full else "example1_scaled.json"
    run(HERE / "configs" / name, outdir=args.out)
