"""
Limit-cycle extraction with a Poincare return map.

The section is the vertical line through the fixed point, restricted to the
half above it. Stable cycles are found by forward integration, unstable ones
by the same procedure in reversed time (exact for planar flows).
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from matplotlib.path import Path as PolygonPath
from scipy.spatial import cKDTree

from carbonate import StochasticSystem
from config import get_config
from errors import CycleSearchError, DomainError, NoCycleError
from utils.curves import cumulative_arc_length, resample_closed
from .fixed_point import find_fixed_point, is_stable
from .integrator import Direction, integrate, rk4_step

logger = logging.getLogger(__name__)

MIN_CYCLE_POINTS = 64
TUBE_DENSITY = 2048


class Stability(str, Enum):
    """Stability of a periodic orbit."""
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass
class LimitCycle:
    """
    Closed discrete orbit, points equidistant in arc length.

    Points follow the orientation of the forward flow and the last point
    repeats the first.
    """
    points: np.ndarray
    period: float
    stability: Stability
    fixed_point: Optional[np.ndarray] = None
    closure_error: float = 0.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.stability = Stability(self.stability)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError(f"cycle points must have shape (M, 2), got {self.points.shape}")
        if len(self.points) < MIN_CYCLE_POINTS:
            raise ValueError(f"a cycle needs at least {MIN_CYCLE_POINTS} points")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def closure(self) -> float:
        return float(np.linalg.norm(self.points[-1] - self.points[0]))

    @property
    def perimeter(self) -> float:
        return float(cumulative_arc_length(self.points)[-1])

    @property
    def bounding_box_diagonal(self) -> float:
        return float(np.linalg.norm(self.points.max(axis=0) - self.points.min(axis=0)))

    @cached_property
    def _polygon(self) -> PolygonPath:
        return PolygonPath(self.points, closed=True)

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(resample_closed(self.points, TUBE_DENSITY))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Point-in-polygon test for an array (n, 2) of states."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self._polygon.contains_points(points)

    def distance(self, points: np.ndarray) -> np.ndarray:
        """Approximate Euclidean distance from each state to the cycle."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        dist, _ = self._tree.query(points)
        return dist


def _refine_crossing(
    system: StochasticSystem, x: float, y: float, h: float,
    section: float, g0: float, g1: float,
) -> Tuple[float, float, float]:
    """Locate the sub-step tau in (0, h] where the RK4 step hits the section (Illinois)."""
    lo, hi, g_lo, g_hi = 0.0, h, g0, g1
    tau, xt, yt = h, x, y
    tol = 1e-13 * max(1.0, abs(section))
    side = 0
    for _ in range(60):
        tau = (lo * g_hi - hi * g_lo) / (g_hi - g_lo)
        xt, yt = rk4_step(system, x, y, tau)
        g = xt - section
        if abs(g) < tol:
            break
        if (g < 0) == (g_lo < 0):
            lo, g_lo = tau, g
            if side == -1:
                g_hi *= 0.5
            side = -1
        else:
            hi, g_hi = tau, g
            if side == 1:
                g_lo *= 0.5
            side = 1
    return tau, xt, yt


def _poincare_search(
    system: StochasticSystem,
    start: np.ndarray,
    fixed_point: np.ndarray,
    direction: Direction,
) -> Tuple[np.ndarray, float, int]:
    """
    Iterate the return map until consecutive crossings agree to cycle_tol.

    Returns:
        (crossing point, period, number of crossings)
    """
    cfg = get_config().cycles
    fx, fy = float(fixed_point[0]), float(fixed_point[1])
    scale = max(1.0, float(np.linalg.norm(fixed_point)))
    collapse_amp = 1e-4 * scale
    max_amp = 1e3 * scale

    h = direction.sign * cfg.dt
    x, y = float(start[0]), float(start[1])
    g_prev = x - fx
    t = 0.0
    last: Optional[Tuple[float, float]] = None
    crossings = 0

    for _ in range(cfg.max_steps):
        xn, yn = rk4_step(system, x, y, h)
        if not system.point_admissible(xn, yn):
            raise NoCycleError(
                f"return map diverged: trajectory left the domain at t = {t:.4g}"
            )
        g = xn - fx
        if g_prev != 0.0 and (g * g_prev < 0.0 or g == 0.0):
            tau, xc, yc = _refine_crossing(system, x, y, h, fx, g_prev, g)
            if yc > fy:
                crossings += 1
                tc = t + abs(tau)
                amp = yc - fy
                if amp > max_amp:
                    raise NoCycleError(f"return map diverged (amplitude {amp:.3e})")
                if last is not None:
                    if amp < collapse_amp:
                        raise NoCycleError("return map converges to the fixed point")
                    displacement = abs(yc - last[1])
                    logger.debug(
                        f"Crossing {crossings}: amplitude {amp:.6g}, displacement {displacement:.3e}"
                    )
                    if displacement < cfg.cycle_tol:
                        return np.array([xc, yc]), tc - last[0], crossings
                last = (tc, yc)
        g_prev = g
        x, y = xn, yn
        t += cfg.dt

    raise CycleSearchError(f"return map not converged after {cfg.max_steps} steps")


def _seed(fixed_point: np.ndarray, offset: float) -> np.ndarray:
    scale = max(1.0, abs(float(fixed_point[1])))
    return np.array([fixed_point[0], fixed_point[1] + offset * scale])


def find_limit_cycle(
    system: StochasticSystem,
    stability: Stability,
    fixed_point: Optional[np.ndarray] = None,
    n_points: Optional[int] = None,
    unstable_cycle: Optional["LimitCycle"] = None,
) -> LimitCycle:
    """
    Find a stable or unstable limit cycle around the equilibrium.

    Args:
        system: Planar system
        stability: Which cycle to return
        fixed_point: Equilibrium; found by Newton when omitted
        n_points: Points of the resampled cycle (at least the configured minimum)
        unstable_cycle: Already known unstable cycle, used to seed the stable search

    Returns:
        LimitCycle resampled equidistantly in arc length

    Raises:
        NoCycleError: if the requested cycle does not exist
        CycleSearchError: if the search ran out of steps or the orbit left the domain
    """
    cfg = get_config().cycles
    stability = Stability(stability)
    n_points = max(cfg.min_points, n_points or 0)
    if fixed_point is None:
        fixed_point = find_fixed_point(system)
    fixed_point = np.asarray(fixed_point, dtype=float)
    fp_stable = is_stable(system, fixed_point)

    if stability is Stability.UNSTABLE:
        if not fp_stable:
            raise NoCycleError("fixed point is unstable: no unstable cycle surrounds it")
        direction = Direction.BACKWARD
        start = _seed(fixed_point, cfg.seed_offset)
    else:
        direction = Direction.FORWARD
        if fp_stable:
            if unstable_cycle is None:
                try:
                    unstable_cycle = find_limit_cycle(system, Stability.UNSTABLE, fixed_point)
                except NoCycleError as e:
                    raise NoCycleError(f"no stable cycle: {e}") from e
            anchor = unstable_cycle.points[0]
            start = fixed_point + 1.25 * (anchor - fixed_point)
        else:
            start = _seed(fixed_point, cfg.seed_offset)

    crossing, period, crossings = _poincare_search(system, start, fixed_point, direction)

    try:
        orbit = integrate(system, crossing, period, cfg.dt, direction=direction)
    except DomainError as e:
        raise CycleSearchError(f"cycle orbit left the domain: {e}") from e
    states = orbit.states if direction is Direction.FORWARD else orbit.states[::-1]
    closure_error = float(np.linalg.norm(states[-1] - states[0]))
    if closure_error > cfg.closure_tol:
        logger.warning(
            f"{stability.value} cycle closes to {closure_error:.2e} (> {cfg.closure_tol:.0e})"
        )

    cycle = LimitCycle(
        points=resample_closed(states[:-1], n_points),
        period=period,
        stability=stability,
        fixed_point=fixed_point,
        closure_error=closure_error,
    )
    logger.info(
        f"Found {stability.value} cycle: period {period:.4f}, "
        f"perimeter {cycle.perimeter:.4g}, {crossings} crossings"
    )
    return cycle


def find_cycles(
    system: StochasticSystem, fixed_point: Optional[np.ndarray] = None, n_points: Optional[int] = None,
) -> Tuple[LimitCycle, LimitCycle]:
    """Unstable and stable cycles of a bistable system, in that order."""
    if fixed_point is None:
        fixed_point = find_fixed_point(system)
    unstable = find_limit_cycle(system, Stability.UNSTABLE, fixed_point, n_points)
    stable = find_limit_cycle(system, Stability.STABLE, fixed_point, n_points, unstable_cycle=unstable)
    return unstable, stable
