"""Electromagnetic Casimir energies from scattering amplitudes and log-determinants."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BesselOverflowError,
    CasimirError,
    ConvergenceError,
    DomainError,
    ExtrapolationError,
    FunctionOverflowError,
    NoisyStencilError,
    PrecisionLossError,
    SingularRoundTripError,
    UnsupportedFeatureError,
)
from .geometries import (  # noqa: E402
    SolveOptions,
    cylinder_plate_energy,
    energy,
    force,
    parabola_plate_energy,
    two_cylinders_energy,
)
from .model import (  # noqa: E402
    PERFECT_CONDUCTOR,
    VACUUM,
    Constant,
    CylinderPlate,
    EnergyResult,
    FrequencyGrid,
    Medium,
    ParabolaPlate,
    PerfectConductor,
    PolarizabilityTensor,
    Tabulated,
    TwoCylinders,
)

__all__ = [
    "__version__",
    "BesselOverflowError", "CasimirError", "ConvergenceError", "DomainError", "ExtrapolationError",
    "FunctionOverflowError", "NoisyStencilError", "PrecisionLossError", "SingularRoundTripError",
    "UnsupportedFeatureError",
    "SolveOptions", "cylinder_plate_energy", "energy", "force", "parabola_plate_energy", "two_cylinders_energy",
    "PERFECT_CONDUCTOR", "VACUUM", "Constant", "CylinderPlate", "EnergyResult", "FrequencyGrid", "Medium",
    "ParabolaPlate", "PerfectConductor", "PolarizabilityTensor", "Tabulated", "TwoCylinders",
]
