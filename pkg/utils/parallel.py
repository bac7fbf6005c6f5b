"""
Process-pool helpers with deterministic result ordering.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply func to every item, optionally on a process pool.

    Results are returned in input order whatever the worker count, so the
    output only depends on the inputs. func and the items must be picklable
    when workers > 1.

    Args:
        func: Module-level callable (or functools.partial of one)
        items: Inputs
        workers: Number of processes; <= 1 runs inline

    Returns:
        List of results in input order
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    n = min(workers, len(items))
    logger.debug(f"Dispatching {len(items)} tasks to {n} workers")
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
