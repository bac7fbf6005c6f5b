"""Geometric minimum action method for carbon-gmam."""
from .path import (
    DiscretePath,
    straight_line,
    reparameterize,
    deform_to_endpoints,
    path_length,
)
from .action import geometric_action, action_terms
from .solver import GmamConfig, TransitionResult, relax_step, solve
from .cycle_target import (
    CandidateOutcome,
    candidate_indices,
    refinement_indices,
    quasipotential_to_cycle,
)

__all__ = [
    # Paths
    'DiscretePath',
    'straight_line',
    'reparameterize',
    'deform_to_endpoints',
    'path_length',
    # Action
    'geometric_action',
    'action_terms',
    # Solver
    'GmamConfig',
    'TransitionResult',
    'relax_step',
    'solve',
    # Cycle target
    'CandidateOutcome',
    'candidate_indices',
    'refinement_indices',
    'quasipotential_to_cycle',
]
