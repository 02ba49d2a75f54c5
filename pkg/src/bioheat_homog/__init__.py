"""Two-scale bioheat transfer: periodic cell problems, a homogenized
memory-type macro model and a resolved micro reference solver."""

from .cell_static import (
    EffectiveCoefficients,
    PhysicalParams,
    derive_coefficients,
    effective_coefficients,
    solve_correctors,
)
from .cell_transient import CellTransientBundle, solve_cell_transients
from .geometry import (
    BLOOD,
    TISSUE,
    GeometryError,
    InclusionSpec,
    MicroGrid,
    UnitCellGeometry,
    build_unit_cell,
    tile_micro_domain,
)
from .macro_solver import MacroProblem, MacroTrajectory, reconstruct_blood, solve_macro
from .micro_solver import MicroTrajectory, energy_norms, solve_micro
from .numerics import KernelSamples, SolverError, TimeGrid, cg_solve
from .profiles import DataProfiles, Profile

__version__ = "0.1.0"
