"""
Polyline geometry helpers: arc length and equidistant resampling.
"""
import numpy as np

from errors import DegeneratePathError


def segment_lengths(points: np.ndarray) -> np.ndarray:
    """Euclidean length of each segment of a polyline (N-1 values)."""
    return np.linalg.norm(np.diff(points, axis=0), axis=1)


def cumulative_arc_length(points: np.ndarray) -> np.ndarray:
    """Cumulative arc length, starting at 0 (N values)."""
    return np.concatenate([[0.0], np.cumsum(segment_lengths(points))])


def resample_polyline(points: np.ndarray, n: int, min_length: float = 1e-12) -> np.ndarray:
    """
    Resample a polyline to n points equidistant in arc length.

    Endpoints are copied exactly; interior points are placed by inverting the
    monotone cumulative length with linear interpolation.

    Args:
        points: Array (N, 2)
        n: Number of output points (>= 2)
        min_length: Total length below which the curve is degenerate

    Returns:
        Array (n, 2)
    """
    points = np.asarray(points, dtype=float)
    arc = cumulative_arc_length(points)
    total = arc[-1]
    if not np.isfinite(total) or total < min_length:
        raise DegeneratePathError(f"polyline length {total:.3e} is degenerate")

    # Drop zero-length segments so the cumulative length is strictly increasing
    keep = np.concatenate([[True], np.diff(arc) > 0])
    arc, pts = arc[keep], points[keep]

    targets = np.linspace(0.0, total, n)
    out = np.empty((n, points.shape[1]))
    for k in range(points.shape[1]):
        out[:, k] = np.interp(targets, arc, pts[:, k])
    out[0] = points[0]
    out[-1] = points[-1]
    return out


def resample_closed(points: np.ndarray, n: int) -> np.ndarray:
    """
    Resample a closed curve to n points equidistant in arc length.

    The first and last output points coincide exactly.
    """
    points = np.asarray(points, dtype=float)
    if np.any(points[0] != points[-1]):
        points = np.vstack([points, points[:1]])
    return resample_polyline(points, n)
