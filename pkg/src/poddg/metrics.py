"""L2 and L1 distances between DG fields and their time series."""

from dataclasses import dataclass

import numpy as np

from .discretization import gauss_rule, legendre_table

__all__ = ["ErrorSeries", "l2_error", "l1_error", "error_series"]


def _diff_at_quadrature(f, g, q):
    f.check_compatible(g)
    rule = gauss_rule(q if q is not None else 2 * f.degree + 2)
    V, _ = legendre_table(f.degree, rule)
    return (f.coeffs - g.coeffs) @ V.T, rule.weights * (0.5 * f.mesh.h)


def l2_error(f, g, q=None):
    """``||f - g||_{L2}`` by Gauss quadrature (exact for the default ``2k+2`` points)."""
    d, w = _diff_at_quadrature(f, g, q)
    return float(np.sqrt(np.sum(d * d * w)))


def l1_error(f, g, q=None):
    """``||f - g||_{L1}`` by Gauss quadrature.

    The absolute value is not a polynomial, so this is approximate near sign
    changes of ``f - g``.
    """
    d, w = _diff_at_quadrature(f, g, q)
    return float(np.sum(np.abs(d) * w))


@dataclass
class ErrorSeries:
    times: np.ndarray
    l2: np.ndarray
    l1: np.ndarray

    def rows(self):
        return zip(self.times, self.l2, self.l1)


def error_series(fom, rom, times=None, rom_times=None):
    """Per-sample L2/L1 errors between two sequences of fields.

    ``fom`` and ``rom`` are sequences of :class:`FeField` (e.g. a
    :class:`SnapshotSet`). If both time grids are given they must agree.
    """
    if times is None:
        times = getattr(fom, "times", None)
    if rom_times is None:
        rom_times = getattr(rom, "times", None)
    if len(fom) != len(rom):
        raise ValueError(f"trajectory lengths differ: {len(fom)} vs {len(rom)}")
    if times is not None and rom_times is not None:
        bad = np.flatnonzero(~np.isclose(times, rom_times, rtol=1e-12, atol=1e-14))
        if bad.size:
            i = bad[0]
            raise ValueError(f"time grids differ first at index {i}: {times[i]} vs {rom_times[i]}")
    if times is None:
        times = np.arange(len(fom), dtype=float)
    l2 = np.array([l2_error(rom[i], fom[i]) for i in range(len(fom))])
    l1 = np.array([l1_error(rom[i], fom[i]) for i in range(len(fom))])
    return ErrorSeries(np.asarray(times, dtype=float), l2, l1)
