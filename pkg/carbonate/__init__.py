"""Carbonate model module for carbon-gmam."""
from .params import ModelParams, State, load_params, parse_params
from .functions import (
    sigmoid,
    sigmoid_complement,
    sigmoid_derivative,
    buffer,
    buffer_derivative,
)
from .system import (
    StochasticSystem,
    CarbonateSystem,
    drift,
    diffusion,
    inverse_metric,
    jacobian,
    finite_difference_jacobian,
    check_jacobian,
)
from .reference import DoubleWellSystem, LinearSystem, BistableOscillator

__all__ = [
    # Parameters
    'ModelParams',
    'State',
    'load_params',
    'parse_params',
    # Functions
    'sigmoid',
    'sigmoid_complement',
    'sigmoid_derivative',
    'buffer',
    'buffer_derivative',
    # Systems
    'StochasticSystem',
    'CarbonateSystem',
    'drift',
    'diffusion',
    'inverse_metric',
    'jacobian',
    'finite_difference_jacobian',
    'check_jacobian',
    # Reference systems
    'DoubleWellSystem',
    'LinearSystem',
    'BistableOscillator',
]
