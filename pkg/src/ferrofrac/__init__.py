"""ferrofrac: phase-field fracture of ferromagnetic materials in 2D.

Coupled solves for the out-of-plane magnetic vector potential, plane-strain
elastic equilibrium with magnetostrictive stresses, and a crack phase-field
with history-based irreversibility, advanced in time by a staggered
fixed-point loop.
"""

from .config import build_simulation, parse_config, preset, preset_names
from .driver import RunState, Simulation, StaggeredConfig
from .materials import MaterialSet, TransitionRule

__all__ = [
    "MaterialSet",
    "RunState",
    "Simulation",
    "StaggeredConfig",
    "TransitionRule",
    "build_simulation",
    "parse_config",
    "preset",
    "preset_names",
]

__version__ = "0.1.0"
