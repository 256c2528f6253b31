"""Time-domain Maxwell solver on the nonuniform Yee grid."""

from .cpml import CPMLConfig
from .snapshot import field_plane, plane_slice
from .solver import (
    ConvergenceWarning,
    CurrentSource,
    FaceRecord,
    FieldState,
    LossRecord,
    NearFieldRecord,
    PortRecord,
    Simulation,
    SimulationConfig,
    SimulationDiverged,
    SimulationResult,
    run,
)
from .sources import GaussianDerivative, ModulatedGaussian

__all__ = [
    "CPMLConfig", "ConvergenceWarning", "CurrentSource", "FaceRecord", "FieldState", "GaussianDerivative",
    "LossRecord", "ModulatedGaussian", "NearFieldRecord", "PortRecord", "Simulation", "SimulationConfig",
    "SimulationDiverged", "SimulationResult", "field_plane", "plane_slice", "run",
]
