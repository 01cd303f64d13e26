"""DGSEM for linear hyperbolic systems with coefficient jumps at material interfaces."""

from .basis import LglBasis, build_basis
from .coupling import CouplingOperator, IllPosedInterfaceError, build_coupling, upwind_flux
from .mesh import Mesh, build_cartesian_mesh, build_interval_mesh
from .models import Material, ModelKind
from .solver import DGSEM, SolverAbort, SolverConfig, StateField, advance, stable_timestep

__all__ = [
    "DGSEM",
    "CouplingOperator",
    "IllPosedInterfaceError",
    "LglBasis",
    "Material",
    "Mesh",
    "ModelKind",
    "SolverAbort",
    "SolverConfig",
    "StateField",
    "advance",
    "build_basis",
    "build_cartesian_mesh",
    "build_coupling",
    "build_interval_mesh",
    "stable_timestep",
    "upwind_flux",
]
