"""
Geometric minimum action method.

Each outer iteration relaxes the interior nodes along

    phi_t = lambda^2 phi'' - lambda H_thx phi' + H_thth H_x + lambda lambda' phi'

with H(x, th) = <kappa, th> + 1/2 <th, D th>, th = A (lambda phi' - kappa) and
lambda = |kappa|_A / |phi'|_A. The diffusion term is implicit (one
tridiagonal solve per coordinate), everything else explicit; nodes are then
redistributed to equal arc length.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import solve_banded

from carbonate import StochasticSystem
from errors import DomainError, RelaxationError
from .action import action_terms, geometric_action
from .path import (
    DiscretePath,
    _as_point,
    check_nondegenerate,
    deform_to_endpoints,
    min_chord,
    reparameterize,
    straight_line,
)

logger = logging.getLogger(__name__)

COINCIDENT_NODE = 1e-14
# Accepted action increase, relative to sum |dphi|_A |kappa|_A (round-off level)
ACCEPT_RTOL = 1e-10


class GmamConfig(BaseModel):
    """Numerical settings of the relaxation."""
    model_config = ConfigDict(extra="forbid")

    n_points: int = Field(default=3000, ge=3)
    max_outer_iters: int = Field(default=20000, ge=1)
    step_tau: float = Field(default=1e-3, gt=0)
    conv_tol: float = Field(default=1e-8, gt=0)
    quadrature: Literal["midpoint", "trapezoid"] = "midpoint"
    min_step_tau: float = Field(default=1e-8, gt=0)
    step_growth: float = Field(default=1.2, ge=1.0)
    log_every: int = Field(default=500, ge=1)


@dataclass
class TransitionResult:
    """
    Outcome of a minimum action solve.

    Attributes:
        path: Relaxed path with its action set
        action: Geometric action of path
        endpoint_index: Index of the end point in the target cycle's points
        converged: True if the displacement fell below conv_tol
        iterations: Outer iterations performed
        action_history: Action after every accepted step
        step_tau: Relaxation step in use at the end
        candidates: Per-candidate outcomes when solved against a cycle
    """
    path: DiscretePath
    action: float
    endpoint_index: Optional[int] = None
    converged: bool = False
    iterations: int = 0
    action_history: List[float] = field(default_factory=list, repr=False)
    step_tau: float = 0.0
    message: str = ""
    candidates: list = field(default_factory=list, repr=False)

    @property
    def arrival(self) -> np.ndarray:
        return self.path.end

    def metadata(self) -> dict:
        return {
            "action": self.action,
            "iterations": self.iterations,
            "converged": self.converged,
            "endpoint_index": self.endpoint_index,
            "n_points": self.path.n_points,
        }


def _hamiltonian_update(points: np.ndarray, system: StochasticSystem, h: float):
    """lambda per node and the explicit part of the relaxation velocity."""
    dphi = np.gradient(points, h, axis=0)
    drift = system.drift(points)
    jac = system.jacobian(points)
    cov = system.noise_covariance(points)
    dcov = system.noise_covariance_gradient(points)
    metric = system.inverse_metric(points)

    b_norm = np.sqrt(np.einsum("ni,nij,nj->n", drift, metric, drift))
    t_norm = np.sqrt(np.einsum("ni,nij,nj->n", dphi, metric, dphi))
    lam = b_norm / t_norm

    theta = np.einsum("nij,nj->ni", metric, lam[:, None] * dphi - drift)
    h_x = np.einsum("nji,nj->ni", jac, theta) + 0.5 * np.einsum("nikj,ni,nk->nj", dcov, theta, theta)
    h_thx_dphi = np.einsum("nij,nj->ni", jac, dphi) + np.einsum("nikj,nk,nj->ni", dcov, theta, dphi)
    dlam = np.gradient(lam, h)

    explicit = (
        -lam[:, None] * h_thx_dphi
        + np.einsum("nij,nj->ni", cov, h_x)
        + (lam * dlam)[:, None] * dphi
    )
    return lam, explicit


def relax_step(
    path: DiscretePath,
    system: StochasticSystem,
    config: GmamConfig,
    tau: Optional[float] = None,
) -> DiscretePath:
    """
    One outer gMAM iteration: semi-implicit update, endpoint pinning, reparameterization.

    Args:
        path: Current path (endpoints are held fixed)
        system: Planar system
        config: Solver settings
        tau: Pseudo-time step; defaults to config.step_tau

    Returns:
        New equidistant path

    Raises:
        RelaxationError: if the tridiagonal solve fails or produces non-finite nodes
    """
    tau = config.step_tau if tau is None else tau
    if min_chord(path) < COINCIDENT_NODE:
        path = reparameterize(path)
    points = path.points
    n = len(points)
    h = 1.0 / (n - 1)

    lam, explicit = _hamiltonian_update(points, system, h)
    if not np.all(np.isfinite(explicit)):
        raise RelaxationError("non-finite relaxation velocity")

    r = tau * lam[1:-1] ** 2 / h ** 2
    banded = np.zeros((3, n))
    banded[1] = 1.0
    banded[1, 1:-1] += 2.0 * r
    banded[0, 2:] = -r
    banded[2, :-2] = -r

    rhs = points + tau * explicit
    rhs[0], rhs[-1] = points[0], points[-1]
    try:
        updated = solve_banded((1, 1), banded, rhs)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise RelaxationError(f"tridiagonal solve failed: {e}") from e
    if not np.all(np.isfinite(updated)):
        raise RelaxationError("tridiagonal solve produced non-finite nodes")

    updated[0], updated[-1] = points[0], points[-1]
    return reparameterize(DiscretePath(updated))


def solve(
    system: StochasticSystem,
    start,
    end,
    config: Optional[GmamConfig] = None,
    initial_path: Optional[DiscretePath] = None,
) -> TransitionResult:
    """
    Minimize the geometric action between two states.

    Steps that increase the action are rejected and the step is halved (down
    to min_step_tau); accepted steps let it grow back towards step_tau.

    Args:
        system: Planar system
        start: Initial state
        end: Final state (!= start)
        config: Solver settings
        initial_path: Previous solution to deform instead of a straight line

    Returns:
        TransitionResult; converged is False when the budget runs out or the
        step floor is reached
    """
    config = config or GmamConfig()
    a, b = _as_point(start), _as_point(end)
    if np.array_equal(a, b):
        raise DomainError("start and end states coincide")

    if initial_path is not None:
        path = deform_to_endpoints(initial_path, a, b, config.n_points)
    else:
        path = straight_line(a, b, config.n_points)
    check_nondegenerate(path)

    terms, gross = action_terms(path.points, system, config.quadrature)
    action = float(np.sum(terms))
    history = [action]
    tau = config.step_tau
    converged = False
    message = "iteration budget exhausted"
    iteration = 0

    for iteration in range(1, config.max_outer_iters + 1):
        while True:
            try:
                candidate = relax_step(path, system, config, tau)
                new_terms, new_gross = action_terms(candidate.points, system, config.quadrature)
                new_action = float(np.sum(new_terms))
                if new_action <= action + ACCEPT_RTOL * max(gross, new_gross):
                    break
            except (DomainError, RelaxationError) as e:
                logger.debug(f"Step {iteration} rejected at tau={tau:.2e}: {e}")
            tau *= 0.5
            if tau < config.min_step_tau:
                candidate = None
                break

        if candidate is None:
            message = f"step floor {config.min_step_tau:.0e} reached"
            logger.warning(f"gMAM stalled after {iteration - 1} iterations: {message}")
            iteration -= 1
            break

        displacement = float(np.max(np.abs(candidate.points - path.points)))
        path, action, gross = candidate, new_action, new_gross
        history.append(action)
        tau = min(tau * config.step_growth, config.step_tau)

        if iteration % config.log_every == 0:
            logger.debug(
                f"iter {iteration}: action {action:.8g}, displacement {displacement:.3e}, tau {tau:.2e}"
            )
        if displacement < config.conv_tol:
            converged = True
            message = "displacement below tolerance"
            break

    action = geometric_action(path, system, config.quadrature)
    path.action = action
    logger.debug(f"gMAM finished: action {action:.8g}, {iteration} iterations, {message}")
    return TransitionResult(
        path=path,
        action=action,
        converged=converged,
        iterations=iteration,
        action_history=history,
        step_tau=tau,
        message=message,
    )
