"""POD-DG reduced-order modeling for the 1D viscous Burgers equation.

Full-order IMEX HDG/DG solver, method-of-snapshots POD in the DG mass
inner product, and an offline/online reduced model with optional
convective and eddy-viscosity closure terms.
"""

from .discretization import FeField, Mesh1D, build_mesh, project_function
from .fom import FomConfig, FomResult, initial_condition, run_fom
from .metrics import error_series, l1_error, l2_error
from .pod import PodBasis, RankError, SnapshotSet, build_basis, correlation_matrix
from .rom import RomOperators, build_offline, project_initial, run_rom

__version__ = "0.1.0"

__all__ = [
    "FeField",
    "Mesh1D",
    "build_mesh",
    "project_function",
    "FomConfig",
    "FomResult",
    "initial_condition",
    "run_fom",
    "error_series",
    "l1_error",
    "l2_error",
    "PodBasis",
    "RankError",
    "SnapshotSet",
    "build_basis",
    "correlation_matrix",
    "RomOperators",
    "build_offline",
    "project_initial",
    "run_rom",
]
