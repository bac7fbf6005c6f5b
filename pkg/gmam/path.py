"""
Discrete transition paths and their arc-length parameterization.
"""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from carbonate import State, StochasticSystem
from errors import DegeneratePathError
from utils.curves import cumulative_arc_length, resample_polyline, segment_lengths

MIN_LENGTH = 1e-12


@dataclass
class DiscretePath:
    """
    Ordered nodes phi_0..phi_{N-1} of a curve in the phase plane.

    Attributes:
        points: Array (N, 2), N >= 3
        action: Geometric action if evaluated
    """
    points: np.ndarray
    action: Optional[float] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError(f"path points must have shape (N, 2), got {self.points.shape}")
        if len(self.points) < 3:
            raise ValueError(f"a path needs at least 3 points, got {len(self.points)}")

    def __len__(self):
        return len(self.points)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def alpha(self) -> np.ndarray:
        """Normalized arc-length parameter in [0, 1]."""
        arc = cumulative_arc_length(self.points)
        return arc / arc[-1] if arc[-1] > 0 else np.linspace(0.0, 1.0, len(arc))


def _as_point(x: Union[State, np.ndarray, tuple]) -> np.ndarray:
    if isinstance(x, State):
        return x.as_array()
    return np.asarray(x, dtype=float)


def straight_line(start, end, n_points: int) -> DiscretePath:
    """Equidistant nodes on the segment from start to end (endpoints exact)."""
    a, b = _as_point(start), _as_point(end)
    s = np.linspace(0.0, 1.0, n_points)[:, None]
    points = a + s * (b - a)
    points[0], points[-1] = a, b
    return DiscretePath(points)


def reparameterize(path: DiscretePath, n_points: Optional[int] = None) -> DiscretePath:
    """
    Redistribute nodes to equal Euclidean chord lengths.

    Endpoints are kept bit-identical. With n_points the path is resampled
    to a new resolution.

    Raises:
        DegeneratePathError: if the total length is below 1e-12
    """
    n = n_points or path.n_points
    return DiscretePath(resample_polyline(path.points, n, min_length=MIN_LENGTH))


def deform_to_endpoints(path: DiscretePath, start, end, n_points: int) -> DiscretePath:
    """
    Reuse the shape of a previous path between new endpoints.

    The endpoint displacements are blended linearly along the normalized arc
    length, then the result is resampled to n_points.
    """
    a, b = _as_point(start), _as_point(end)
    alpha = path.alpha[:, None]
    points = path.points + (1.0 - alpha) * (a - path.start) + alpha * (b - path.end)
    points[0], points[-1] = a, b
    return reparameterize(DiscretePath(points), n_points)


def min_chord(path: DiscretePath) -> float:
    return float(np.min(segment_lengths(path.points)))


def path_length(
    path: Union[DiscretePath, np.ndarray],
    system: Optional[StochasticSystem] = None,
    metric: str = "euclidean",
) -> float:
    """
    Length of a polyline.

    Args:
        path: DiscretePath or array (N, 2), N >= 2
        system: Required for metric="action"
        metric: "euclidean" in (c, w) units, or "action" for the length in
            the inverse noise metric A evaluated at segment midpoints

    Returns:
        Sum of segment lengths
    """
    points = path.points if isinstance(path, DiscretePath) else np.asarray(path, dtype=float)
    if len(points) < 2:
        raise ValueError("path_length needs at least 2 points")
    if metric == "euclidean":
        return float(np.sum(segment_lengths(points)))
    if metric == "action":
        if system is None:
            raise ValueError("metric='action' requires a system")
        d = np.diff(points, axis=0)
        mid = 0.5 * (points[1:] + points[:-1])
        metric_a = system.inverse_metric(mid)
        return float(np.sum(np.sqrt(np.einsum("ni,nij,nj->n", d, metric_a, d))))
    raise ValueError(f"unknown length metric {metric!r}")


def check_nondegenerate(path: DiscretePath) -> None:
    total = float(np.sum(segment_lengths(path.points)))
    if not np.isfinite(total) or total < MIN_LENGTH:
        raise DegeneratePathError(f"path length {total:.3e} is degenerate")
