"""Central configurations, harmonic rigidity tests and action minimization for the N-body problem."""
from . import central_config, kronecker, mechanics, trig_harmonics, variational
from .central_config import CentralConfigResult, compare_dimensions, minimize_iu2, objective_iu2
from .errors import (
    CollisionAbort,
    CollisionError,
    DegeneratePair,
    HypothesisViolated,
    NBodyError,
    NoConvergence,
    SearchExhausted,
    SlowConvergence,
    ValidationError,
)
from .kronecker import KroneckerQuery, fractional_part, simultaneous_approx
from .mechanics import Configuration, MassVector, moment_of_inertia, potential
from .trig_harmonics import TrigLoop, pair_harmonics, rigidity_check
from .variational import FourierLoop, action_functional, build_relative_equilibrium, minimize_action

__version__ = "0.1.0"
