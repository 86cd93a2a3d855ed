"""Unicycle extremum-seeking source seeking.

A differential-drive robot turning at a fixed rate climbs an unknown
scalar field using only point measurements. The linear speed follows a
dithered extremum-seeking law; a geometric EKF estimates the averaged
gradient dynamics and an adaptation law shrinks the dither as the
estimated gradient vanishes, so the robot stops at the source.
"""

from .controller import EscParams, PlantState
from .field import FieldModel, NoiseModel, SourceSchedule
from .kernels import BACKEND
from .sim import ScenarioConfig, Simulation, Trajectory, run

__all__ = [
    "BACKEND",
    "EscParams",
    "FieldModel",
    "NoiseModel",
    "PlantState",
    "ScenarioConfig",
    "Simulation",
    "SourceSchedule",
    "Trajectory",
    "run",
]

__version__ = "0.1.0"
