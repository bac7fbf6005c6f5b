"""
Fixed-step deterministic integration of planar systems.

RK4 is the default; the explicit Euler mode evaluates the drift exactly as the
Euler-Maruyama simulator does, so a zero-noise simulation reproduces it.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Union

import numpy as np

from carbonate import State, StochasticSystem
from errors import DomainError, DomainExitError

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    """Time direction of an integration."""
    FORWARD = "forward"
    BACKWARD = "backward"

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.FORWARD else -1.0


class Method(str, Enum):
    """Fixed-step scheme."""
    RK4 = "rk4"
    EULER = "euler"


@dataclass
class Trajectory:
    """
    A sampled trajectory.

    Attributes:
        times: Time stamps (n,), strictly increasing
        states: States (n, 2) in the system's coordinates
        dt: Step used
        clamp_count: Number of boundary clamp events (stochastic runs)
        aborted: True if the run stopped early on a non-finite state
        metadata: Free-form run information
    """
    times: np.ndarray
    states: np.ndarray
    dt: float
    clamp_count: int = 0
    aborted: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.states.shape[1] != 2:
            raise ValueError(f"states must have shape (n, 2), got {self.states.shape}")
        if len(self.times) != len(self.states):
            raise ValueError(
                f"times and states differ in length ({len(self.times)} vs {len(self.states)})"
            )
        if len(self.times) < 2 and not self.aborted:
            raise ValueError("a trajectory needs at least two samples")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def start(self) -> np.ndarray:
        return self.states[0]

    @property
    def end(self) -> np.ndarray:
        return self.states[-1]


def rk4_step(system: StochasticSystem, x: float, y: float, h: float) -> Tuple[float, float]:
    """One classical Runge-Kutta step of size h (negative h integrates backward)."""
    f = system.drift_point
    k1x, k1y = f(x, y)
    k2x, k2y = f(x + 0.5 * h * k1x, y + 0.5 * h * k1y)
    k3x, k3y = f(x + 0.5 * h * k2x, y + 0.5 * h * k2y)
    k4x, k4y = f(x + h * k3x, y + h * k3y)
    return (
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
    )


def euler_step(system: StochasticSystem, x: np.ndarray, h: float) -> np.ndarray:
    """One explicit Euler step on a (2,) array, using the vectorized drift."""
    return x + system.drift(x[None, :])[0] * h


def _as_array(start: Union[State, np.ndarray, tuple]) -> np.ndarray:
    if isinstance(start, State):
        return start.as_array()
    return np.asarray(start, dtype=float).copy()


def integrate(
    system: StochasticSystem,
    start: Union[State, np.ndarray, tuple],
    t_end: float,
    dt: float,
    direction: Union[Direction, str] = Direction.FORWARD,
    method: Union[Method, str] = Method.RK4,
) -> Trajectory:
    """
    Integrate the deterministic flow with a fixed step.

    The number of steps is ceil(t_end / dt); the step is shrunk slightly if
    needed so the last sample lands on t_end. Backward integration follows
    the sign-flipped drift and still reports increasing times.

    Args:
        system: Planar system
        start: Initial state
        t_end: Duration (> 0)
        dt: Nominal step (> 0)
        direction: forward or backward
        method: rk4 (default) or euler

    Returns:
        Trajectory with n_steps + 1 samples

    Raises:
        DomainExitError: if the state leaves the admissible domain
    """
    if dt <= 0 or t_end <= 0:
        raise DomainError(f"dt and t_end must be positive (dt={dt}, t_end={t_end})")
    direction = Direction(direction)
    method = Method(method)

    x0 = _as_array(start)
    system.check_admissible(x0)

    n_steps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    h = t_end / n_steps
    signed_h = direction.sign * h

    states = np.empty((n_steps + 1, 2))
    states[0] = x0

    if method is Method.RK4:
        x, y = float(x0[0]), float(x0[1])
        for i in range(1, n_steps + 1):
            x, y = rk4_step(system, x, y, signed_h)
            if not system.point_admissible(x, y):
                raise DomainExitError(
                    f"trajectory left the domain at t = {i * h:.6g} ({x}, {y})", time=i * h
                )
            states[i, 0] = x
            states[i, 1] = y
    else:
        current = x0
        for i in range(1, n_steps + 1):
            current = euler_step(system, current, signed_h)
            if not system.point_admissible(float(current[0]), float(current[1])):
                raise DomainExitError(
                    f"trajectory left the domain at t = {i * h:.6g} ({current})", time=i * h
                )
            states[i] = current

    times = np.arange(n_steps + 1) * h
    return Trajectory(
        times=times,
        states=states,
        dt=h,
        metadata={"direction": direction.value, "method": method.value},
    )
