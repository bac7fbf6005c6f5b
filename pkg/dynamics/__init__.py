"""Deterministic phase-plane analysis for carbon-gmam."""
from .integrator import Direction, Method, Trajectory, integrate, rk4_step, euler_step
from .fixed_point import find_fixed_point, eigenvalues, is_stable
from .cycles import LimitCycle, Stability, find_limit_cycle, find_cycles
from .regimes import (
    Regime,
    RegimeReport,
    classify_regime,
    scan_regimes,
    find_thresholds,
    is_monotone,
)

__all__ = [
    # Integration
    'Direction',
    'Method',
    'Trajectory',
    'integrate',
    'rk4_step',
    'euler_step',
    # Equilibria
    'find_fixed_point',
    'eigenvalues',
    'is_stable',
    # Cycles
    'LimitCycle',
    'Stability',
    'find_limit_cycle',
    'find_cycles',
    # Regimes
    'Regime',
    'RegimeReport',
    'classify_regime',
    'scan_regimes',
    'find_thresholds',
    'is_monotone',
]
