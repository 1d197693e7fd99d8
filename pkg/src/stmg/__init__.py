"""Space-time multigrid for 1D transient heat conduction with SIMP materials."""

from stmg.mesh import CoarseningDirection, SpaceTimeGrid, build_fine_grid, coarsen_grid
from stmg.materials import MaterialPair, ALUMINIUM_EPOXY
from stmg.assembly import AssembledSystem, assemble_system
from stmg.transfer import InterpolationMethod, TransferPair, build_transfer
from stmg.rediscretisation import ReassemblyMethod, RediscretisationMethod
from stmg.strategy import CoarseningPath, plan_coarsening
from stmg.multigrid import (
    LevelHierarchy,
    SolveReport,
    SolverConfig,
    build_hierarchy,
    mg_solve,
)

__all__ = [
    "AssembledSystem",
    "CoarseningDirection",
    "CoarseningPath",
    "InterpolationMethod",
    "LevelHierarchy",
    "MaterialPair",
    "ReassemblyMethod",
    "RediscretisationMethod",
    "SolveReport",
    "SolverConfig",
    "SpaceTimeGrid",
    "ALUMINIUM_EPOXY",
    "TransferPair",
    "assemble_system",
    "build_fine_grid",
    "build_hierarchy",
    "build_transfer",
    "coarsen_grid",
    "mg_solve",
    "plan_coarsening",
]
