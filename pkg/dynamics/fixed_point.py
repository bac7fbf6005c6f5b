"""
Equilibria of planar systems: damped Newton search and linear stability.
"""
import logging
from typing import Optional, Union

import numpy as np

from carbonate import State, StochasticSystem
from errors import ConvergenceError, SingularJacobianError

logger = logging.getLogger(__name__)

MAX_NEWTON_ITERS = 100
RESIDUAL_TOL = 1e-10
MAX_CONDITION = 1e14


def _residual(system: StochasticSystem, x: np.ndarray) -> float:
    return float(np.max(np.abs(system.drift(x))))


def find_fixed_point(
    system: StochasticSystem,
    guess: Optional[Union[State, np.ndarray]] = None,
    max_iter: int = MAX_NEWTON_ITERS,
    tol: float = RESIDUAL_TOL,
) -> np.ndarray:
    """
    Solve drift(x) = 0 by Newton iteration with the analytic Jacobian.

    Steps are halved until the residual decreases and the iterate stays
    admissible.

    Args:
        system: Planar system
        guess: Starting point; defaults to system.fixed_point_guess()
        max_iter: Newton iteration budget
        tol: Max-norm residual tolerance

    Returns:
        Equilibrium as a (2,) array

    Raises:
        SingularJacobianError: if the Jacobian cannot be inverted
        ConvergenceError: if the residual stays above tol
    """
    if guess is None:
        x = system.fixed_point_guess()
    elif isinstance(guess, State):
        x = guess.as_array()
    else:
        x = np.asarray(guess, dtype=float).copy()
    system.check_admissible(x)

    residual = _residual(system, x)
    for iteration in range(max_iter):
        if residual < tol:
            logger.debug(f"Newton converged in {iteration} iterations (residual {residual:.2e})")
            return x

        jac = system.jacobian(x)
        if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > MAX_CONDITION:
            raise SingularJacobianError(f"singular Jacobian at {x} (iteration {iteration})")
        step = np.linalg.solve(jac, -system.drift(x))

        t = 1.0
        while t > 1e-6:
            trial = x + t * step
            if system.is_admissible(trial):
                trial_residual = _residual(system, trial)
                if trial_residual < residual:
                    break
            t *= 0.5
        else:
            raise ConvergenceError(
                f"Newton line search stalled at {x} with residual {residual:.3e}"
            )
        x, residual = trial, trial_residual

    if residual < tol:
        return x
    raise ConvergenceError(
        f"Newton did not converge in {max_iter} iterations (residual {residual:.3e})"
    )


def eigenvalues(system: StochasticSystem, x: np.ndarray) -> np.ndarray:
    """Eigenvalues of the drift Jacobian at x."""
    return np.linalg.eigvals(system.jacobian(np.asarray(x, dtype=float)))


def is_stable(system: StochasticSystem, x: np.ndarray) -> bool:
    """True if every eigenvalue has negative real part."""
    return bool(np.all(eigenvalues(system, x).real < 0))
