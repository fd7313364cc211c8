"""Chainwise STIRAP (c-STIRAP) simulation toolkit.

Builds chain-coupled multilevel molecular systems, propagates their
lossy dynamics under time-dependent pulse schedules, analyzes dark
states and adiabaticity, and optimizes pulse parameters.
"""

from .chain import (
    ChainSystem,
    ChainValidationError,
    Coupling,
    Level,
    PulseEnvelope,
    SimulationGrid,
    collision_decay_rate,
    default_grid,
    envelope_eval,
    excited_level,
    ground_level,
    intensity_from_rabi,
    rabi_from_intensity,
    validate_chain,
)
from .hamiltonian import (
    AdiabaticFrame,
    DarkState,
    DegenerateDriveError,
    GaugeContinuityError,
    adiabatic_frame,
    build_hamiltonian,
    dark_state_analytic5,
    dark_states_numeric,
    frame_sequence,
    mixing_angle,
    nonadiabatic_coupling,
)
from .propagate import (
    IntegrationError,
    Trajectory,
    basis_state,
    propagate_adiabatic5,
    propagate_density,
    propagate_state,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticFrame",
    "ChainSystem",
    "ChainValidationError",
    "Coupling",
    "DarkState",
    "DegenerateDriveError",
    "GaugeContinuityError",
    "IntegrationError",
    "Level",
    "PulseEnvelope",
    "SimulationGrid",
    "Trajectory",
    "adiabatic_frame",
    "basis_state",
    "build_hamiltonian",
    "collision_decay_rate",
    "dark_state_analytic5",
    "dark_states_numeric",
    "default_grid",
    "envelope_eval",
    "excited_level",
    "frame_sequence",
    "ground_level",
    "intensity_from_rabi",
    "mixing_angle",
    "nonadiabatic_coupling",
    "propagate_adiabatic5",
    "propagate_density",
    "propagate_state",
    "rabi_from_intensity",
    "validate_chain",
]
