import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from poddg.discretization import FeField, build_mesh  # noqa: E402
from poddg.fom import FomConfig, run_fom  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_field(rng, mesh, k, scale=1.0):
    return FeField(mesh, k, scale * rng.standard_normal((mesh.n_elems, k + 1)))


@pytest.fixture(scope="session")
def coarse_run():
    """64 elements, k=2, nu=1e-2, dt=1e-3, 200 steps, every step stored."""
    cfg = FomConfig(n_elems=64, degree=2, nu=1e-2, dt=1e-3, t_end=0.2, ic="step")
    return run_fom(cfg)


@pytest.fixture
def small_mesh():
    return build_mesh(0.0, 1.0, 8)


ACCEPTANCE_LINES = []


def report(number, passed, detail):
    """Record one acceptance verdict for the end-of-run summary."""
    line = f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
