"""Dissipative dynamics of two coupled qubits in an Ohmic bosonic bath.

``semiclassical`` integrates the mean-field damped equations for the total
spin and the composite spin ``m = S2 x S1``.  ``oracle`` evolves the full
spin-boson Hamiltonian exactly on a truncated bath for cross-checks.
"""

from .backend import NAME as BACKEND
from .core import (ModelParams, alpha_of_t, cross, memory_coefficient, sine_integral,
                   solve_damped_rate, vec3)
from .semiclassical import (IntegratorConfig, SemiclassicalState, Trajectory,
                            effective_field_m, initial_expectations, integrate)

__all__ = [
    "BACKEND", "ModelParams", "alpha_of_t", "cross", "memory_coefficient", "sine_integral",
    "solve_damped_rate", "vec3", "IntegratorConfig", "SemiclassicalState", "Trajectory",
    "effective_field_m", "initial_expectations", "integrate",
]

__version__ = "0.1.0"
