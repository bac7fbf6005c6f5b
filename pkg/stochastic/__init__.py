"""Monte Carlo simulation module for carbon-gmam."""
from .rng import BLOCK_STEPS, block_generator, block_normals
from .euler_maruyama import SimConfig, euler_maruyama, simulate_ensemble
from .transitions import (
    TransitionRecord,
    TransitionBundle,
    detect_transition,
    transition_segment,
    transition_bundle,
    bundle_concordance,
    choose_epsilon,
    transition_counts,
)

__all__ = [
    # Random streams
    'BLOCK_STEPS',
    'block_generator',
    'block_normals',
    # Simulation
    'SimConfig',
    'euler_maruyama',
    'simulate_ensemble',
    # Transitions
    'TransitionRecord',
    'TransitionBundle',
    'detect_transition',
    'transition_segment',
    'transition_bundle',
    'bundle_concordance',
    'choose_epsilon',
    'transition_counts',
]
