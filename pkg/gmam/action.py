"""
Geometric action of a discrete path.

S(phi) = sum over segments of |dphi|_A |kappa|_A - <dphi, kappa>_A, with
<u, v>_A = u^T A v and A the inverse noise covariance. The duration has been
minimized out, so the value depends on the image of the curve only.
"""
from typing import Tuple

import numpy as np

from carbonate import StochasticSystem
from .path import DiscretePath

QUADRATURES = ("midpoint", "trapezoid")


def _local_terms(tangent: np.ndarray, x: np.ndarray, system: StochasticSystem) -> Tuple[np.ndarray, np.ndarray]:
    metric = system.inverse_metric(x)
    drift = system.drift(x)
    t_norm = np.sqrt(np.einsum("ni,nij,nj->n", tangent, metric, tangent))
    b_norm = np.sqrt(np.einsum("ni,nij,nj->n", drift, metric, drift))
    inner = np.einsum("ni,nij,nj->n", tangent, metric, drift)
    gross = t_norm * b_norm
    return gross - inner, gross


def action_terms(
    points: np.ndarray, system: StochasticSystem, quadrature: str = "midpoint",
) -> Tuple[np.ndarray, float]:
    """
    Per-segment (midpoint) or per-node (trapezoid) action contributions.

    Returns:
        (non-negative terms, gross sum of |dphi|_A |kappa|_A)
    """
    points = np.asarray(points, dtype=float)
    if quadrature == "midpoint":
        d = np.diff(points, axis=0)
        mid = 0.5 * (points[1:] + points[:-1])
        terms, gross = _local_terms(d, mid, system)
        return np.maximum(terms, 0.0), float(np.sum(gross))
    if quadrature == "trapezoid":
        # derivative with respect to the node index, unit spacing
        d = np.gradient(points, axis=0)
        terms, gross = _local_terms(d, points, system)
        weights = np.ones(len(points))
        weights[0] = weights[-1] = 0.5
        return np.maximum(terms, 0.0) * weights, float(np.sum(gross * weights))
    raise ValueError(f"unknown quadrature {quadrature!r}; expected one of {QUADRATURES}")


def geometric_action(path: DiscretePath, system: StochasticSystem, quadrature: str = "midpoint") -> float:
    """
    Geometric action of a path.

    Args:
        path: Discrete path (points must be admissible)
        system: Planar system supplying drift and metric
        quadrature: "midpoint" (default) or "trapezoid"

    Returns:
        Action >= 0

    Raises:
        MetricSingularityError: if the metric is singular at some node
    """
    terms, _ = action_terms(path.points, system, quadrature)
    return float(np.sum(terms))
