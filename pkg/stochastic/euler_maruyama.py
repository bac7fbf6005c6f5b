"""
Euler-Maruyama simulation of dX = kappa(X) dt + eps eta(X) dB.

Paths are advanced together as a batch; each path's noise comes from its own
keyed stream, so results do not depend on the batch composition. Paths are
processed in fixed chunks of CHUNK_PATHS, and only whole chunks are shipped to
workers.
"""
import logging
import math
from functools import partial
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from carbonate import State, StochasticSystem
from dynamics import Trajectory
from utils.parallel import ordered_map
from .rng import BLOCK_STEPS, block_normals

logger = logging.getLogger(__name__)

CHUNK_PATHS = 64


class SimConfig(BaseModel):
    """Monte Carlo settings."""
    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(default=0.01, gt=0)
    dt: float = Field(default=1e-4, gt=0)
    t_max: float = Field(default=20.0, gt=0)
    seed: int = Field(default=0, ge=0, le=2 ** 64 - 1)
    n_paths: int = Field(default=200, ge=1)
    record_every: int = Field(default=10, ge=1)


def _n_steps(t_max: float, dt: float):
    n = max(1, int(math.ceil(t_max / dt - 1e-9)))
    return n, t_max / n


def _run_chunk(
    path_ids: Sequence[int],
    system: StochasticSystem,
    start: np.ndarray,
    config: SimConfig,
    epsilon: float,
) -> List[Trajectory]:
    path_ids = np.asarray(path_ids, dtype=np.int64)
    n_paths = len(path_ids)
    n_steps, h = _n_steps(config.t_max, config.dt)
    sqrt_h = math.sqrt(h)
    every = config.record_every
    n_records = n_steps // every + 1 + (1 if n_steps % every else 0)

    c_min = getattr(system, "c_min", None)
    x = np.tile(start, (n_paths, 1))
    alive = np.ones(n_paths, dtype=bool)
    abort_step = np.full(n_paths, -1)
    clamps = np.zeros(n_paths, dtype=np.int64)

    records = np.empty((n_records, n_paths, 2))
    record_steps = np.empty(n_records, dtype=np.int64)
    records[0] = x
    record_steps[0] = 0
    k = 1

    noise = None
    for step in range(n_steps):
        offset = step % BLOCK_STEPS
        if offset == 0:
            block = step // BLOCK_STEPS
            noise = block_normals(config.seed, path_ids, block, min(BLOCK_STEPS, n_steps - step))

        idx = np.flatnonzero(alive)
        if len(idx) == n_paths:
            xa = x
        else:
            xa = x[idx]
        if len(idx):
            eta = system.diffusion(xa)
            kick = np.einsum("nij,nj->ni", eta, noise[offset, idx])
            xn = xa + system.drift(xa) * h + epsilon * kick * sqrt_h

            if c_min is not None:
                low = xn[:, 0] < c_min
                if np.any(low):
                    xn[low, 0] = c_min
                    clamps[idx[low]] += 1

            bad = ~np.all(np.isfinite(xn), axis=1)
            if np.any(bad):
                alive[idx[bad]] = False
                abort_step[idx[bad]] = step + 1
                xn[bad] = np.nan
            x[idx] = xn

        if (step + 1) % every == 0 or step + 1 == n_steps:
            records[k] = x
            record_steps[k] = step + 1
            k += 1

    times_all = record_steps[:k] * h
    trajectories = []
    for j, pid in enumerate(path_ids):
        states = records[:k, j]
        aborted = abort_step[j] >= 0
        if aborted:
            keep = record_steps[:k] < abort_step[j]
            states = states[keep]
            times = times_all[keep]
            logger.warning(f"Path {pid} aborted on a non-finite state at step {abort_step[j]}")
        else:
            times = times_all
        if clamps[j]:
            logger.debug(f"Path {pid}: {clamps[j]} clamp events at c_min")
        trajectories.append(Trajectory(
            times=times,
            states=states,
            dt=h * every,
            clamp_count=int(clamps[j]),
            aborted=bool(aborted),
            metadata={"path_id": int(pid), "epsilon": epsilon, "seed": config.seed, "step": h},
        ))
    return trajectories


def _as_start(start) -> np.ndarray:
    if isinstance(start, State):
        return start.as_array()
    return np.asarray(start, dtype=float)


def euler_maruyama(
    system: StochasticSystem,
    start,
    config: SimConfig,
    path_id: int = 0,
    epsilon: Optional[float] = None,
) -> Trajectory:
    """
    Simulate a single path.

    Args:
        system: Planar system
        start: Initial state (admissible)
        config: Simulation settings
        path_id: Stream index of the path
        epsilon: Override of config.epsilon; 0 gives the explicit Euler scheme

    Returns:
        Trajectory sampled every config.record_every steps
    """
    x0 = _as_start(start)
    system.check_admissible(x0)
    eps = config.epsilon if epsilon is None else float(epsilon)
    return _run_chunk([path_id], system, x0, config, eps)[0]


def simulate_ensemble(
    system: StochasticSystem,
    start,
    config: SimConfig,
    workers: int = 1,
    epsilon: Optional[float] = None,
    first_path_id: int = 0,
) -> List[Trajectory]:
    """
    Simulate config.n_paths paths with ids first_path_id, first_path_id + 1, ...

    Returns:
        Trajectories ordered by path id
    """
    x0 = _as_start(start)
    system.check_admissible(x0)
    eps = config.epsilon if epsilon is None else float(epsilon)
    ids = list(range(first_path_id, first_path_id + config.n_paths))
    chunks = [ids[i:i + CHUNK_PATHS] for i in range(0, len(ids), CHUNK_PATHS)]

    logger.info(
        f"Simulating {config.n_paths} paths (eps={eps}, dt={config.dt}, t_max={config.t_max}, "
        f"seed={config.seed})"
    )
    task = partial(_run_chunk, system=system, start=x0, config=config, epsilon=eps)
    results = ordered_map(task, chunks, workers)
    trajectories = [t for chunk in results for t in chunk]

    total_clamps = sum(t.clamp_count for t in trajectories)
    if total_clamps:
        logger.warning(f"{total_clamps} clamp events at the concentration floor")
    return trajectories
