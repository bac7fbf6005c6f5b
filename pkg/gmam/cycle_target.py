"""
Quasi-potential from a point to a limit cycle.

The action between two points of the cycle is zero, so the infimum over the
cycle is attained by minimizing over endpoint candidates spread along it.
"""
import logging
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Sequence

import numpy as np

from carbonate import StochasticSystem
from dynamics import LimitCycle
from errors import AllCandidatesFailedError, CarbonGmamError
from utils.parallel import ordered_map
from .path import DiscretePath, _as_point
from .solver import GmamConfig, TransitionResult, solve

logger = logging.getLogger(__name__)


@dataclass
class CandidateOutcome:
    """Result of one endpoint candidate."""
    endpoint_index: int
    action: Optional[float] = None
    converged: bool = False
    iterations: int = 0
    error: Optional[str] = None

    def describe(self) -> str:
        if self.error:
            return f"candidate {self.endpoint_index}: {self.error}"
        return f"candidate {self.endpoint_index}: action {self.action:.6g}, converged={self.converged}"


def candidate_indices(n_cycle_points: int, n_candidates: int) -> List[int]:
    """Indices equidistant in arc length along a closed, equidistant cycle."""
    m = n_cycle_points - 1  # last point repeats the first
    return sorted({int(round(k * m / n_candidates)) % m for k in range(n_candidates)})


def refinement_indices(best: int, solved: Sequence[int], n_cycle_points: int) -> List[int]:
    """Midpoints between the best candidate and its two neighbours along the cycle."""
    m = n_cycle_points - 1
    ordered = sorted(set(solved))
    pos = ordered.index(best)
    prev_idx = ordered[pos - 1]
    next_idx = ordered[(pos + 1) % len(ordered)]
    gap_prev = (best - prev_idx) % m
    gap_next = (next_idx - best) % m
    out = []
    if gap_prev > 1:
        out.append((best - gap_prev // 2) % m)
    if gap_next > 1:
        out.append((best + gap_next // 2) % m)
    return [i for i in out if i not in solved]


def _solve_candidate(
    index: int,
    system: StochasticSystem,
    start: np.ndarray,
    cycle_points: np.ndarray,
    config: GmamConfig,
    initial_path: Optional[DiscretePath],
):
    try:
        result = solve(system, start, cycle_points[index], config, initial_path=initial_path)
        result.endpoint_index = index
        return result, CandidateOutcome(index, result.action, result.converged, result.iterations)
    except CarbonGmamError as e:
        return None, CandidateOutcome(index, error=f"{type(e).__name__}: {e}")


def _start_on_cycle(start: np.ndarray, index: int, config: GmamConfig) -> TransitionResult:
    """Zero-action result for a start that is itself an endpoint candidate."""
    logger.info(f"Cycle target: start coincides with cycle point {index}, action 0")
    path = DiscretePath(np.repeat(start[None, :], config.n_points, axis=0), action=0.0)
    return TransitionResult(
        path=path,
        action=0.0,
        endpoint_index=index,
        converged=True,
        message="start lies on the cycle",
        candidates=[CandidateOutcome(index, 0.0, True, 0)],
    )


def quasipotential_to_cycle(
    system: StochasticSystem,
    start,
    cycle: LimitCycle,
    n_candidates: int = 36,
    config: Optional[GmamConfig] = None,
    workers: int = 1,
    refine: bool = True,
    initial_path: Optional[DiscretePath] = None,
) -> TransitionResult:
    """
    Minimum action path from start to the cycle.

    Candidates are solved (in parallel when workers > 1), then the two
    midpoints between the best candidate and its neighbours are tried once.
    Ties go to the lowest cycle index.

    Args:
        system: Planar system
        start: Initial state (usually the stable fixed point)
        cycle: Target cycle, equidistant in arc length
        n_candidates: Number of endpoint candidates (>= 1)
        config: Solver settings
        workers: Processes for the candidate solves
        refine: Run the local refinement pass
        initial_path: Warm-start shape passed to every candidate

    Returns:
        TransitionResult of minimal action, endpoint_index into cycle.points

    Raises:
        AllCandidatesFailedError: if no candidate produced a result
    """
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    config = config or GmamConfig()
    a = _as_point(start)
    scale = max(1.0, float(np.linalg.norm(a)))

    indices = candidate_indices(cycle.n_points, n_candidates)
    on_start = [i for i in indices if np.linalg.norm(cycle.points[i] - a) <= 1e-12 * scale]
    if on_start:
        return _start_on_cycle(a, on_start[0], config)
    task = partial(
        _solve_candidate,
        system=system,
        start=a,
        cycle_points=cycle.points,
        config=config,
        initial_path=initial_path,
    )

    results = ordered_map(task, indices, workers)
    if refine and results:
        finished = [(r.action, r.endpoint_index) for r, _ in results if r is not None]
        if finished:
            best = min(finished)[1]
            extra = refinement_indices(best, indices, cycle.n_points)
            on_start = [i for i in extra if np.linalg.norm(cycle.points[i] - a) <= 1e-12 * scale]
            if on_start:
                return _start_on_cycle(a, on_start[0], config)
            if extra:
                logger.debug(f"Refining around candidate {best}: {extra}")
                results += ordered_map(task, extra, workers)

    outcomes = [o for _, o in results]
    solved = [r for r, _ in results if r is not None]
    if not solved:
        raise AllCandidatesFailedError(
            f"all {len(outcomes)} endpoint candidates failed",
            diagnostics=[o.describe() for o in outcomes],
        )
    for o in outcomes:
        if o.error:
            logger.warning(o.describe())

    best = min(solved, key=lambda r: (r.action, r.endpoint_index))
    logger.info(
        f"Cycle target: best endpoint {best.endpoint_index} "
        f"({len(solved)}/{len(outcomes)} candidates solved), action {best.action:.6g}"
    )
    best.candidates = outcomes
    return best
