"""
Composed time series around a transition: metastable wandering, the most
probable path, and relaxation onto the oscillation.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from carbonate import ModelParams
from errors import ConvergenceError
from stochastic import euler_maruyama
from .settings import ExperimentConfig
from .sweep import SweepRecord, system_at

logger = logging.getLogger(__name__)


@dataclass
class SeriesSegment:
    """One labelled piece of the composed series."""
    label: str
    role: str
    times: np.ndarray
    states: np.ndarray


@dataclass
class ComposedSeries:
    nu: float
    segments: List[SeriesSegment]

    def rows(self):
        for seg in self.segments:
            for t, (c, w) in zip(seg.times, seg.states):
                yield [seg.label, seg.role, float(t), float(c), float(w)]


SERIES_HEADER = ["segment", "role", "t", "c", "w"]

PRE, PATH, POST = "pre-transition", "transition-path", "post-transition"
ROLES = {PRE: "green", PATH: "orange", POST: "blue"}


def compose_transition_series(
    config: ExperimentConfig, record: SweepRecord, params: ModelParams, seed: Optional[int] = None,
) -> ComposedSeries:
    """
    Build the three-segment series for one converged sweep record.

    (i) A noisy excursion around the fixed point, shown time-reversed so it
    ends exactly at the fixed point; (ii) the path on a pseudo-time axis
    proportional to arc length over compose.display_duration; (iii) a noisy
    run started at the arrival point. Consecutive segments share their
    boundary sample.

    Args:
        config: Experiment configuration (sim and compose settings)
        record: Converged SweepRecord carrying its path
        params: Model parameters
        seed: Overrides config.sim.seed

    Returns:
        ComposedSeries
    """
    if not record.ok or not record.converged or record.path is None:
        raise ConvergenceError(f"nu = {record.nu}: record has no converged path")
    system = system_at(params, config.c_x, record.nu)
    sim = config.sim if seed is None else config.sim.model_copy(update={"seed": seed})
    path = record.path.points

    pre = euler_maruyama(
        system, path[0], sim.model_copy(update={"t_max": config.compose.pre_duration}), path_id=0,
    )
    pre_states = pre.states[::-1]
    pre_times = pre.times
    t0 = float(pre_times[-1])

    path_times = t0 + config.compose.display_duration * record.path.alpha
    t1 = float(path_times[-1])

    post = euler_maruyama(
        system, path[-1], sim.model_copy(update={"t_max": config.compose.post_duration}), path_id=1,
    )
    post_times = t1 + post.times

    if record.unstable_cycle is not None:
        outside = ~record.unstable_cycle.contains(pre_states)
        if np.any(outside):
            logger.warning(
                f"nu = {record.nu}: pre-transition segment leaves the unstable cycle "
                f"({int(outside.sum())} samples)"
            )
    logger.info(
        f"Composed series for nu = {record.nu}: c range on path "
        f"[{path[:, 0].min():.1f}, {path[:, 0].max():.1f}]"
    )
    return ComposedSeries(
        nu=record.nu,
        segments=[
            SeriesSegment(PRE, ROLES[PRE], pre_times, pre_states),
            SeriesSegment(PATH, ROLES[PATH], path_times, path.copy()),
            SeriesSegment(POST, ROLES[POST], post_times, post.states),
        ],
    )
