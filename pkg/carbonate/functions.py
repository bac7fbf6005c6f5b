"""
Sigmoid and buffer functions of the carbonate model.

All functions accept scalars or numpy arrays and are pure.
"""
import numpy as np

from errors import DomainError


def _as_concentration(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise DomainError(f"concentration must be finite and >= 0, got min {np.min(c)}")
    return c


def sigmoid(c, c_half: float, gamma: float):
    """
    Sigmoidal switch s(c, c_half) = c^gamma / (c^gamma + c_half^gamma).

    Args:
        c: Concentration (>= 0)
        c_half: Crossover concentration (> 0)
        gamma: Sharpness (> 0)

    Returns:
        Value in [0, 1), same shape as c
    """
    if c_half <= 0:
        raise DomainError(f"crossover concentration must be > 0, got {c_half}")
    if gamma <= 0:
        raise DomainError(f"sigmoid sharpness must be > 0, got {gamma}")
    c = _as_concentration(c)
    cg = np.power(c, gamma)
    result = cg / (cg + c_half ** gamma)
    return result if result.ndim else float(result)


def sigmoid_complement(c, c_half: float, gamma: float):
    """s_bar = 1 - s, evaluated so that s + s_bar == 1 exactly."""
    s = sigmoid(c, c_half, gamma)
    return 1.0 - s


def sigmoid_derivative(c, c_half: float, gamma: float):
    """ds/dc = gamma * c^(gamma-1) * c_half^gamma / (c^gamma + c_half^gamma)^2."""
    c = _as_concentration(c)
    cg = np.power(c, gamma)
    hg = c_half ** gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        result = gamma * np.power(c, gamma - 1.0) * hg / (cg + hg) ** 2
    result = np.where(c > 0, result, 0.0 if gamma > 1 else np.inf)
    return result if result.ndim else float(result)


def buffer(c, params):
    """
    Buffer function f(c) = f0 * c^beta / (c^beta + c_f^beta).

    Strictly increasing on c >= 0, f(0) = 0 and bounded above by f0.

    Args:
        c: Concentration (>= 0)
        params: ModelParams supplying f0, c_f and beta
    """
    return params.f0 * sigmoid(c, params.c_f, params.beta)


def buffer_derivative(c, params):
    return params.f0 * sigmoid_derivative(c, params.c_f, params.beta)
