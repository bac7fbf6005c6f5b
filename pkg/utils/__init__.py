"""Utils module for carbon-gmam."""
from .timeutils import (
    utc_now,
    datetime_to_iso,
    StageTimer,
    format_duration,
)

from .files import (
    file_sha256,
    format_float,
    write_csv,
    write_json,
    describe_version,
)

from .curves import (
    segment_lengths,
    cumulative_arc_length,
    resample_polyline,
    resample_closed,
)

from .parallel import ordered_map

__all__ = [
    # Time utilities
    'utc_now',
    'datetime_to_iso',
    'StageTimer',
    'format_duration',
    # File utilities
    'file_sha256',
    'format_float',
    'write_csv',
    'write_json',
    'describe_version',
    # Curve utilities
    'segment_lengths',
    'cumulative_arc_length',
    'resample_polyline',
    'resample_closed',
    # Parallel
    'ordered_map',
]
