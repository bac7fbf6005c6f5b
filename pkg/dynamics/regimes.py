"""
Regime classification along the respiration crossover c_x.

Three windows appear with increasing c_x: a single stable fixed point, a
bistable window (stable fixed point, unstable and stable cycles) and a
cycle-only window after the fixed point loses stability.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Dict, List, Optional, Sequence

import numpy as np

from carbonate import CarbonateSystem, ModelParams
from config import get_config
from errors import CarbonGmamError, CycleSearchError, DomainError, NoCycleError
from utils.parallel import ordered_map
from .cycles import LimitCycle, Stability, find_limit_cycle
from .fixed_point import find_fixed_point, is_stable

logger = logging.getLogger(__name__)


class Regime(str, Enum):
    """Dynamical regime at a given c_x."""
    SINGLE_STABLE_POINT = "single-stable-point"
    BISTABLE = "bistable"
    CYCLE_ONLY = "cycle-only"
    FAILED = "failed"


REGIME_ORDER = {
    Regime.SINGLE_STABLE_POINT: 0,
    Regime.BISTABLE: 1,
    Regime.CYCLE_ONLY: 2,
}


@dataclass
class RegimeReport:
    """Classification of one c_x value."""
    c_x: float
    regime: Regime
    fixed_point: Optional[np.ndarray] = None
    fixed_point_stable: bool = False
    error: Optional[str] = None
    unstable_cycle: Optional[LimitCycle] = field(default=None, repr=False)
    stable_cycle: Optional[LimitCycle] = field(default=None, repr=False)

    @property
    def c_star(self) -> float:
        return float(self.fixed_point[0]) if self.fixed_point is not None else float("nan")

    @property
    def w_star(self) -> float:
        return float(self.fixed_point[1]) if self.fixed_point is not None else float("nan")


def classify_regime(c_x: float, params: ModelParams, with_cycles: bool = False) -> RegimeReport:
    """
    Classify the regime at one c_x.

    The fixed point's stability separates cycle-only from the rest; among
    stable cases, the existence of an unstable cycle marks bistability.
    Solver failures are recorded in the report instead of raised.

    Args:
        c_x: Respiration crossover concentration
        params: Base parameters (c_x is replaced)
        with_cycles: Also extract the stable cycle(s) for export

    Returns:
        RegimeReport
    """
    system = CarbonateSystem(params.with_updates(c_x=float(c_x)))
    try:
        fp = find_fixed_point(system)
        stable = is_stable(system, fp)
        report = RegimeReport(c_x=float(c_x), regime=Regime.CYCLE_ONLY, fixed_point=fp,
                              fixed_point_stable=stable)
        if not stable:
            if with_cycles:
                report.stable_cycle = find_limit_cycle(system, Stability.STABLE, fp)
            return report

        try:
            unstable = find_limit_cycle(system, Stability.UNSTABLE, fp)
        except CycleSearchError:
            raise
        except NoCycleError as e:
            logger.debug(f"c_x = {c_x}: no unstable cycle ({e})")
            report.regime = Regime.SINGLE_STABLE_POINT
            return report

        report.regime = Regime.BISTABLE
        if with_cycles:
            report.unstable_cycle = unstable
            report.stable_cycle = find_limit_cycle(
                system, Stability.STABLE, fp, unstable_cycle=unstable
            )
        return report

    except CarbonGmamError as e:
        logger.warning(f"c_x = {c_x}: classification failed: {e}")
        return RegimeReport(c_x=float(c_x), regime=Regime.FAILED, error=f"{type(e).__name__}: {e}")


def _bisect_threshold(lo: float, hi: float, lo_regime: Regime, params: ModelParams, tol: float) -> float:
    """Bisect between two c_x with different regimes."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        regime = classify_regime(mid, params).regime
        if regime is lo_regime:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _threshold_task(pair, params: ModelParams, tol: float):
    lo, hi, lo_regime, hi_regime = pair
    return lo_regime, hi_regime, _bisect_threshold(lo, hi, lo_regime, params, tol)


def find_thresholds(
    reports: Sequence[RegimeReport], params: ModelParams, workers: int = 1,
) -> Dict[str, float]:
    """
    Refine every regime change in a scan by bisection.

    Returns:
        Mapping such as {"single-stable-point/bistable": 55.9, ...}
    """
    tol = get_config().scan.threshold_tol
    ordered = sorted(reports, key=lambda r: r.c_x)
    pairs = [
        (a.c_x, b.c_x, a.regime, b.regime)
        for a, b in zip(ordered, ordered[1:])
        if a.regime != b.regime and Regime.FAILED not in (a.regime, b.regime)
    ]
    results = ordered_map(partial(_threshold_task, params=params, tol=tol), pairs, workers)

    thresholds = {}
    for lo_regime, hi_regime, value in results:
        key = f"{lo_regime.value}/{hi_regime.value}"
        thresholds[key] = round(value, 4)
        logger.info(f"Threshold {key}: c_x = {value:.3f}")
    return thresholds


def is_monotone(reports: Sequence[RegimeReport]) -> bool:
    """True if regimes along increasing c_x never go back (failed points ignored)."""
    ranks = [REGIME_ORDER[r.regime] for r in sorted(reports, key=lambda r: r.c_x)
             if r.regime in REGIME_ORDER]
    return all(a <= b for a, b in zip(ranks, ranks[1:]))


def scan_regimes(
    c_x_values: Sequence[float],
    params: ModelParams,
    workers: int = 1,
    with_cycles: bool = False,
) -> List[RegimeReport]:
    """
    Classify every c_x value, in parallel with results ordered by c_x.

    Args:
        c_x_values: Values inside the configured scan window
        params: Base parameters
        workers: Number of processes
        with_cycles: Keep the cycles of each report (phase-portrait export)

    Returns:
        One RegimeReport per value, sorted by c_x

    Raises:
        DomainError: if a value is outside the scan window
    """
    lo, hi = get_config().scan.cx_window
    values = sorted(float(v) for v in c_x_values)
    outside = [v for v in values if not lo <= v <= hi]
    if outside:
        raise DomainError(f"c_x values {outside} outside the scan window [{lo}, {hi}]")
    if not values:
        logger.warning("Empty c_x scan: nothing to classify")
        return []

    logger.info(f"Scanning {len(values)} c_x values in [{values[0]}, {values[-1]}]")
    reports = ordered_map(partial(classify_regime, params=params, with_cycles=with_cycles), values, workers)

    counts: Dict[str, int] = {}
    for r in reports:
        counts[r.regime.value] = counts.get(r.regime.value, 0) + 1
    logger.info(f"Regime counts: {counts}")
    if not is_monotone(reports):
        logger.warning("Regime sequence along c_x is not monotone")
    return reports
