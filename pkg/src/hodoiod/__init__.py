"""Initial orbit determination from heading (velocity-direction) observations."""

from .hodograph import (
    MOON,
    CentralBody,
    HeadingObservation,
    HodographParams,
    OrbitalElements,
    elements_to_hodograph,
    hodograph_to_elements,
)
from .simulate import Scenario, generate_observations
from .solver import SolveReport, SolverOptions, solve

__all__ = [
    "MOON", "CentralBody", "HeadingObservation", "HodographParams", "OrbitalElements",
    "elements_to_hodograph", "hodograph_to_elements", "Scenario", "generate_observations",
    "SolveReport", "SolverOptions", "solve",
]
