"""Viscous Burgers from the smooth pulse ``exp(-200 (x - 0.3)^2)``.

The pulse steepens into a shock within the first tenth of the run, so the
reduced models face the same post-shock oscillation problem as the step case.
Same three models and closure constants as ``example1_step.py``.

    python demos/example2_gaussian.py [--full] [--out DIR]
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
    name = "example2.json" if args.full else "example2_scaled.json"
    run(HERE / "configs" / name, outdir=args.out)
