"""
Transition detection and transition-bundle statistics.

A transition leaves the unstable cycle and then stays in a tube around the
stable cycle for at least one period. The bundle collects, for every
transitioning path, the stretch from its last exit of a small ball around the
fixed point to its arrival in the tube.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from carbonate import StochasticSystem
from dynamics import LimitCycle, Trajectory
from .euler_maruyama import SimConfig, simulate_ensemble

logger = logging.getLogger(__name__)

TUBE_FRACTION = 0.02
DELTA_FRACTION = 0.02
MIN_TRANSITIONS = 20


@dataclass
class TransitionRecord:
    """Outcome of transition detection on one trajectory."""
    transitioned: bool
    exit_index: Optional[int] = None
    arrival_index: Optional[int] = None
    exit_time: Optional[float] = None
    arrival_time: Optional[float] = None
    inner_fraction: float = 0.0


@dataclass
class TransitionBundle:
    """Occupancy histogram of transition segments."""
    histogram: np.ndarray
    c_edges: np.ndarray
    w_edges: np.ndarray
    n_transitions: int
    n_paths: int
    epsilon: float
    seed: int
    delta: float
    tube_w: float
    records: List[TransitionRecord] = field(default_factory=list, repr=False)
    segments: List[np.ndarray] = field(default_factory=list, repr=False)

    def metadata(self) -> dict:
        return {
            "c_range": [float(self.c_edges[0]), float(self.c_edges[-1])],
            "w_range": [float(self.w_edges[0]), float(self.w_edges[-1])],
            "bins": [len(self.c_edges) - 1, len(self.w_edges) - 1],
            "bin_size": [float(self.c_edges[1] - self.c_edges[0]),
                         float(self.w_edges[1] - self.w_edges[0])],
            "n_transitions": self.n_transitions,
            "n_paths": self.n_paths,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "delta": self.delta,
            "tube_w": self.tube_w,
        }


def default_tube_width(cycle: LimitCycle) -> float:
    return TUBE_FRACTION * cycle.bounding_box_diagonal


def default_delta(unstable_cycle: LimitCycle) -> float:
    return DELTA_FRACTION * unstable_cycle.bounding_box_diagonal


def _first_full_window(mask: np.ndarray, width: int) -> Optional[int]:
    """First index starting a run of at least width True values."""
    if width <= 0 or len(mask) < width:
        return None
    csum = np.concatenate([[0], np.cumsum(mask.astype(np.int64))])
    full = np.flatnonzero(csum[width:] - csum[:-width] == width)
    return int(full[0]) if len(full) else None


def detect_transition(
    traj: Trajectory,
    fixed_point: np.ndarray,
    cycle: LimitCycle,
    unstable_cycle: LimitCycle,
    tube_w: Optional[float] = None,
) -> TransitionRecord:
    """
    Classify samples and find the first completed transition.

    Args:
        traj: Trajectory (uniform sampling)
        fixed_point: Stable equilibrium
        cycle: Stable limit cycle
        unstable_cycle: Unstable limit cycle separating the basins
        tube_w: Tube half-width; 2% of the cycle's bounding-box diagonal by default

    Returns:
        TransitionRecord; transitioned is False when the horizon ends first
    """
    tube_w = default_tube_width(cycle) if tube_w is None else tube_w
    states = traj.states
    if len(states) < 2:
        return TransitionRecord(transitioned=False)

    inside = unstable_cycle.contains(states)
    near = (cycle.distance(states) <= tube_w) & ~inside
    sample_dt = float(traj.times[1] - traj.times[0])
    # dwell samples span at least one full period
    dwell = int(math.ceil(cycle.period / sample_dt)) + 1

    arrival = _first_full_window(near, dwell)
    inner_fraction = float(np.mean(inside))
    if arrival is None:
        return TransitionRecord(transitioned=False, inner_fraction=inner_fraction)

    # Last inside -> outside crossing before the arrival
    crossings = np.flatnonzero(inside[:arrival] & ~inside[1:arrival + 1])
    exit_index = int(crossings[-1] + 1) if len(crossings) else 0
    return TransitionRecord(
        transitioned=True,
        exit_index=exit_index,
        arrival_index=arrival,
        exit_time=float(traj.times[exit_index]),
        arrival_time=float(traj.times[arrival]),
        inner_fraction=inner_fraction,
    )


def transition_segment(
    traj: Trajectory, record: TransitionRecord, fixed_point: np.ndarray, delta: float,
) -> Optional[np.ndarray]:
    """States from the last exit of the delta-ball to the tube arrival."""
    if not record.transitioned:
        return None
    head = traj.states[:record.arrival_index + 1]
    in_ball = np.linalg.norm(head - fixed_point, axis=1) <= delta
    last_in = np.flatnonzero(in_ball)
    begin = int(last_in[-1]) if len(last_in) else 0
    return head[begin:]


def bundle_grid(cycle: LimitCycle, fixed_point: np.ndarray, pad: float = 0.1) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Histogram bounds: the cycle's bounding box (with the fixed point) padded by pad."""
    pts = np.vstack([cycle.points, fixed_point[None, :]])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    margin = pad * (hi - lo)
    return (lo[0] - margin[0], hi[0] + margin[0]), (lo[1] - margin[1], hi[1] + margin[1])


def transition_bundle(
    system: StochasticSystem,
    config: SimConfig,
    fixed_point: np.ndarray,
    cycle: LimitCycle,
    unstable_cycle: LimitCycle,
    bins: int = 60,
    bounds: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None,
    workers: int = 1,
    epsilon: Optional[float] = None,
    min_transitions: int = MIN_TRANSITIONS,
) -> TransitionBundle:
    """
    Simulate an ensemble from the fixed point and histogram its transition segments.

    Args:
        system: Planar system
        config: Simulation settings (seed, n_paths, horizon)
        fixed_point: Stable equilibrium (start of every path)
        cycle: Stable cycle
        unstable_cycle: Unstable cycle
        bins: Histogram bins per axis
        bounds: ((c_lo, c_hi), (w_lo, w_hi)); from the cycle by default
        workers: Processes
        epsilon: Override of config.epsilon
        min_transitions: Below this count a warning is logged

    Returns:
        TransitionBundle with histogram normalized to total mass 1
    """
    if config.n_paths < 100:
        logger.warning(f"Only {config.n_paths} paths: bundle statistics will be noisy")
    eps = config.epsilon if epsilon is None else epsilon
    fixed_point = np.asarray(fixed_point, dtype=float)
    tube_w = default_tube_width(cycle)
    delta = default_delta(unstable_cycle)
    bounds = bounds or bundle_grid(cycle, fixed_point)

    trajectories = simulate_ensemble(system, fixed_point, config, workers=workers, epsilon=eps)
    records, segments = [], []
    for traj in trajectories:
        record = detect_transition(traj, fixed_point, cycle, unstable_cycle, tube_w)
        records.append(record)
        segment = transition_segment(traj, record, fixed_point, delta)
        if segment is not None:
            segments.append(segment)

    if segments:
        pts = np.vstack(segments)
        hist, c_edges, w_edges = np.histogram2d(pts[:, 0], pts[:, 1], bins=bins, range=bounds)
    else:
        hist = np.zeros((bins, bins))
        c_edges = np.linspace(bounds[0][0], bounds[0][1], bins + 1)
        w_edges = np.linspace(bounds[1][0], bounds[1][1], bins + 1)
    total = hist.sum()
    if total > 0:
        hist = hist / total

    n_transitions = len(segments)
    logger.info(f"eps={eps}: {n_transitions}/{len(trajectories)} paths transitioned")
    if n_transitions < min_transitions:
        logger.warning(
            f"Insufficient transitions: {n_transitions} < {min_transitions} (eps={eps})"
        )
    return TransitionBundle(
        histogram=hist,
        c_edges=c_edges,
        w_edges=w_edges,
        n_transitions=n_transitions,
        n_paths=len(trajectories),
        epsilon=eps,
        seed=config.seed,
        delta=delta,
        tube_w=tube_w,
        records=records,
        segments=segments,
    )


def bundle_concordance(
    bundle: TransitionBundle,
    path_points: np.ndarray,
    fixed_point: np.ndarray,
    cycle: LimitCycle,
) -> float:
    """
    Fraction of path nodes lying in cells at or above the median occupancy.

    Nodes inside the delta-ball or the tube are left out; the median is taken
    over occupied cells. Nodes outside the grid count as misses.
    """
    path_points = np.asarray(path_points, dtype=float)
    fixed_point = np.asarray(fixed_point, dtype=float)
    away = (np.linalg.norm(path_points - fixed_point, axis=1) > bundle.delta) & (
        cycle.distance(path_points) > bundle.tube_w
    )
    nodes = path_points[away]
    occupied = bundle.histogram[bundle.histogram > 0]
    if len(nodes) == 0 or len(occupied) == 0:
        return 0.0
    median = float(np.median(occupied))

    ci = np.searchsorted(bundle.c_edges, nodes[:, 0], side="right") - 1
    wi = np.searchsorted(bundle.w_edges, nodes[:, 1], side="right") - 1
    nc, nw = bundle.histogram.shape
    on_grid = (ci >= 0) & (ci < nc) & (wi >= 0) & (wi < nw)
    hits = np.zeros(len(nodes), dtype=bool)
    hits[on_grid] = bundle.histogram[ci[on_grid], wi[on_grid]] >= median
    return float(np.mean(hits))


def choose_epsilon(
    system: StochasticSystem,
    config: SimConfig,
    fixed_point: np.ndarray,
    cycle: LimitCycle,
    unstable_cycle: LimitCycle,
    min_transitions: int = MIN_TRANSITIONS,
    max_doublings: int = 6,
    workers: int = 1,
    bins: int = 60,
) -> TransitionBundle:
    """
    Double epsilon from config.epsilon until enough transitions occur.

    Returns:
        The first bundle reaching min_transitions, or the last one tried
    """
    eps = config.epsilon
    bundle = None
    for attempt in range(max_doublings + 1):
        bundle = transition_bundle(
            system, config, fixed_point, cycle, unstable_cycle,
            bins=bins, workers=workers, epsilon=eps, min_transitions=0,
        )
        if bundle.n_transitions >= min_transitions:
            logger.info(f"Adaptive eps: {eps} gives {bundle.n_transitions} transitions")
            return bundle
        eps *= 2.0
    logger.warning(
        f"Insufficient transitions after {max_doublings} doublings "
        f"({bundle.n_transitions} < {min_transitions} at eps={bundle.epsilon})"
    )
    return bundle


def transition_counts(
    system: StochasticSystem,
    config: SimConfig,
    fixed_point: np.ndarray,
    cycle: LimitCycle,
    unstable_cycle: LimitCycle,
    epsilons: Sequence[float],
    workers: int = 1,
) -> List[int]:
    """Transition counts for several epsilon values with shared random numbers."""
    counts = []
    for eps in epsilons:
        trajectories = simulate_ensemble(system, fixed_point, config, workers=workers, epsilon=eps)
        counts.append(sum(
            detect_transition(t, fixed_point, cycle, unstable_cycle).transitioned
            for t in trajectories
        ))
    return counts
