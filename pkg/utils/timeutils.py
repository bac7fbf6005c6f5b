"""
Time utilities for carbon-gmam.
Wall-clock stage timings and timestamps for run records.
"""
import time
from contextlib import contextmanager
from datetime import datetime
from typing import Dict, Iterator

import pytz


def utc_now() -> datetime:
    """Get current UTC datetime."""
    return datetime.now(pytz.UTC)


def datetime_to_iso(dt: datetime) -> str:
    """Convert datetime to ISO format string."""
    return dt.isoformat()


class StageTimer:
    """Collects wall-clock durations of named stages."""

    def __init__(self):
        self.started_at = utc_now()
        self.durations: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time a block; repeated names accumulate."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.durations[name] = self.durations.get(name, 0.0) + elapsed

    def as_dict(self) -> dict:
        return {
            "started_at": datetime_to_iso(self.started_at),
            "finished_at": datetime_to_iso(utc_now()),
            "stages_seconds": {k: round(v, 6) for k, v in self.durations.items()},
        }


def format_duration(seconds: float) -> str:
    """Human-readable duration (e.g. '1h 02m', '3m 05s', '0.42s')."""
    if seconds < 60:
        return f"{seconds:.2f}s"
    minutes, secs = divmod(int(round(seconds)), 60)
    if minutes < 60:
        return f"{minutes}m {secs:02d}s"
    hours, minutes = divmod(minutes, 60)
    return f"{hours}h {minutes:02d}m"
