"""
Sweep of the most probable transition over the CO2 injection rate nu.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import List, Optional

import numpy as np

from carbonate import CarbonateSystem, ModelParams
from dynamics import LimitCycle, Stability, find_fixed_point, find_limit_cycle, is_stable
from errors import CarbonGmamError, CycleSearchError, NoCycleError
from gmam import DiscretePath, TransitionResult, path_length, quasipotential_to_cycle
from utils.parallel import ordered_map
from .settings import ExperimentConfig

logger = logging.getLogger(__name__)


class RecordStatus(str, Enum):
    OK = "ok"
    SKIPPED = "skipped"
    FAILED = "failed"


@dataclass
class SweepRecord:
    """Diagnostics of the transition at one nu."""
    nu: float
    status: RecordStatus = RecordStatus.OK
    action: float = math.nan
    path_length: float = math.nan
    arrival_c: float = math.nan
    arrival_w: float = math.nan
    endpoint_index: Optional[int] = None
    converged: bool = False
    iterations: int = 0
    message: str = ""
    fixed_point: Optional[np.ndarray] = field(default=None, repr=False)
    path: Optional[DiscretePath] = field(default=None, repr=False)
    stable_cycle: Optional[LimitCycle] = field(default=None, repr=False)
    unstable_cycle: Optional[LimitCycle] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status is RecordStatus.OK

    def row(self) -> list:
        return [
            self.nu,
            self.status.value,
            self.action,
            self.path_length,
            self.arrival_c,
            self.arrival_w,
            "" if self.endpoint_index is None else self.endpoint_index,
            int(self.converged),
            self.iterations,
        ]


SWEEP_HEADER = [
    "nu", "status", "action", "path_length", "arrival_c", "arrival_w",
    "endpoint_index", "converged", "iterations",
]


def system_at(params: ModelParams, c_x: float, nu: float) -> CarbonateSystem:
    return CarbonateSystem(params.with_updates(c_x=float(c_x), nu=float(nu)))


def transition_at(
    nu: float,
    params: ModelParams,
    config: ExperimentConfig,
    workers: int = 1,
    initial_path: Optional[DiscretePath] = None,
) -> SweepRecord:
    """
    Fixed point, cycles and minimum action transition at one nu.

    Non-bistable nu values come back as skipped; solver failures as failed.
    """
    record = SweepRecord(nu=float(nu))
    system = system_at(params, config.c_x, nu)
    try:
        fp = find_fixed_point(system)
        record.fixed_point = fp
        if not is_stable(system, fp):
            record.status = RecordStatus.SKIPPED
            record.message = "fixed point unstable (cycle-only regime)"
            return record
        try:
            unstable = find_limit_cycle(system, Stability.UNSTABLE, fp, config.cycle_points)
        except CycleSearchError:
            raise
        except NoCycleError as e:
            record.status = RecordStatus.SKIPPED
            record.message = f"no unstable cycle (single-stable-point regime): {e}"
            return record
        stable = find_limit_cycle(
            system, Stability.STABLE, fp, config.cycle_points, unstable_cycle=unstable
        )
        record.unstable_cycle, record.stable_cycle = unstable, stable

        result: TransitionResult = quasipotential_to_cycle(
            system,
            fp,
            stable,
            n_candidates=config.n_candidates,
            config=config.gmam,
            workers=workers,
            refine=config.refine_candidates,
            initial_path=initial_path,
        )
    except CarbonGmamError as e:
        logger.warning(f"nu = {nu}: {type(e).__name__}: {e}")
        record.status = RecordStatus.FAILED
        record.message = f"{type(e).__name__}: {e}"
        return record

    record.path = result.path
    record.action = result.action
    record.path_length = path_length(result.path, system, config.length_metric)
    record.arrival_c, record.arrival_w = (float(v) for v in result.arrival)
    record.endpoint_index = result.endpoint_index
    record.converged = result.converged
    record.iterations = result.iterations
    record.message = result.message
    return record


def run_sweep(config: ExperimentConfig, params: ModelParams, workers: int = 1) -> List[SweepRecord]:
    """
    Run the nu sweep.

    Without warm start the nu values are independent and run in parallel;
    with warm start they run in order, each seeded with the previous path,
    and the endpoint candidates use the workers instead.

    Args:
        config: Experiment configuration
        params: Model parameters (c_x and nu are replaced)
        workers: Processes

    Returns:
        One SweepRecord per nu grid point, in increasing nu
    """
    nus = config.nu_values()
    logger.info(
        f"Sweeping {len(nus)} nu values in [{nus[0]}, {nus[-1]}] at c_x = {config.c_x} "
        f"(N = {config.gmam.n_points}, warm_start={config.warm_start})"
    )

    if config.warm_start:
        records, previous = [], None
        for nu in nus:
            record = transition_at(nu, params, config, workers=workers, initial_path=previous)
            if record.ok:
                previous = record.path
            records.append(record)
            _log_record(record)
    else:
        records = ordered_map(partial(transition_at, params=params, config=config), nus, workers)
        for record in records:
            _log_record(record)

    skipped = sum(r.status is RecordStatus.SKIPPED for r in records)
    failed = sum(r.status is RecordStatus.FAILED for r in records)
    if skipped:
        logger.warning(f"{skipped} nu values skipped (not bistable)")
    if failed:
        logger.warning(f"{failed} nu values failed")
    return records


def _log_record(record: SweepRecord) -> None:
    if record.ok:
        logger.info(
            f"nu = {record.nu:.3f}: action {record.action:.6g}, length {record.path_length:.1f}, "
            f"arrival c {record.arrival_c:.1f}, converged={record.converged}"
        )
    else:
        logger.info(f"nu = {record.nu:.3f}: {record.status.value} ({record.message})")


def critical_nu(records: List[SweepRecord], rel_tol: float = 1e-6) -> Optional[float]:
    """
    nu where the arrival concentration jumps most between neighbours.

    In the carbonate model nu only shifts w by mu * nu, so a flat arrival_c
    profile is the expected outcome; jumps below rel_tol times the arrival
    scale are treated as solver noise.

    Returns:
        Midpoint of the largest jump among consecutive ok records, or None
        when there is no jump above the noise level
    """
    ok = [r for r in records if r.ok]
    if len(ok) < 2:
        return None
    jumps = np.abs(np.diff([r.arrival_c for r in ok]))
    scale = max(1.0, float(np.max(np.abs([r.arrival_c for r in ok]))))
    k = int(np.argmax(jumps))
    if not jumps[k] > rel_tol * scale:
        logger.info(f"No arrival jump above {rel_tol:g} relative across {len(ok)} nu values")
        return None
    return 0.5 * (ok[k].nu + ok[k + 1].nu)
