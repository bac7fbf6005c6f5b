"""
Stochastic planar systems dX = kappa(X) dt + eps * eta(X) dB.

Every method is vectorized over a leading batch shape: points are arrays
of shape (..., 2), matrices come back as (..., 2, 2).
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np

from config import get_config
from errors import DomainError, MetricSingularityError
from .functions import (
    sigmoid,
    sigmoid_derivative,
    buffer,
    buffer_derivative,
)
from .params import ModelParams, State

logger = logging.getLogger(__name__)


class StochasticSystem(ABC):
    """Planar SDE with drift kappa and noise amplitude eta (eps factored out)."""

    state_names: Tuple[str, str] = ("x", "y")

    @abstractmethod
    def drift(self, x: np.ndarray) -> np.ndarray:
        """Deterministic vector field kappa(x)."""

    @abstractmethod
    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Matrix of partial derivatives d kappa_i / d x_j."""

    @abstractmethod
    def diffusion(self, x: np.ndarray) -> np.ndarray:
        """Noise amplitude eta(x); the eps prefactor is not included."""

    def noise_covariance(self, x: np.ndarray) -> np.ndarray:
        """D = eta eta^T."""
        eta = self.diffusion(x)
        return np.einsum("...ik,...jk->...ij", eta, eta)

    def noise_covariance_gradient(self, x: np.ndarray) -> np.ndarray:
        """Array g[..., i, k, j] = d D_ik / d x_j (zero for additive noise)."""
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2, 2, 2))

    def inverse_metric(self, x: np.ndarray) -> np.ndarray:
        """A = (eta eta^T)^-1, the metric of the action."""
        return np.linalg.inv(self.noise_covariance(x))

    def is_admissible(self, x: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(x)))

    def check_admissible(self, x: np.ndarray) -> None:
        if not self.is_admissible(x):
            raise DomainError(f"state outside the admissible domain: {np.asarray(x)}")

    def drift_point(self, x: float, y: float) -> Tuple[float, float]:
        """Scalar drift used by the fixed-step integrators."""
        v = self.drift(np.array([x, y]))
        return float(v[0]), float(v[1])

    def point_admissible(self, x: float, y: float) -> bool:
        return math.isfinite(x) and math.isfinite(y)

    def fixed_point_guess(self) -> np.ndarray:
        """Starting point for the Newton search of the equilibrium."""
        return np.zeros(2)


class CarbonateSystem(StochasticSystem):
    """
    Upper-ocean carbonate model with noisy CO2 injection rate.

    dc = [mu(1 - b s(c,c_p) - theta s_bar(c,c_x) - nu) + w - w0] f(c) dt - eps mu f(c) dB1
    dw = [mu(1 - b s(c,c_p) + theta s_bar(c,c_x) + nu) - w + w0] dt     + eps mu dB2
    """

    state_names = ("c", "w")

    def __init__(self, params: ModelParams, c_min: Optional[float] = None):
        self.params = params
        self.c_min = get_config().domain.c_min if c_min is None else c_min
        self.f_floor = float(buffer(self.c_min, params))

    def __repr__(self):
        return f"CarbonateSystem(c_x={self.params.c_x}, nu={self.params.nu})"

    def fixed_point_guess(self):
        # Adding both equations gives b s(c, c_p) = 1 at equilibrium
        p = self.params
        if p.b > 1.0:
            c = p.c_p * (p.b - 1.0) ** (-1.0 / p.gamma)
        else:
            c = p.c_p
        s_bar_x = 1.0 - float(sigmoid(c, p.c_x, p.gamma))
        return np.array([c, p.w0 + p.mu * (p.theta * s_bar_x + p.nu)])

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 0], x[..., 1]

    def _require_positive(self, c):
        if np.any(c <= 0):
            raise DomainError(f"carbonate concentration must be > 0, got min {np.min(c)}")

    def drift(self, x):
        p = self.params
        c, w = self._split(x)
        self._require_positive(c)
        s_p = sigmoid(c, p.c_p, p.gamma)
        s_bar_x = 1.0 - sigmoid(c, p.c_x, p.gamma)
        f = buffer(c, p)
        dc = (p.mu * (1.0 - p.b * s_p - p.theta * s_bar_x - p.nu) + w - p.w0) * f
        dw = p.mu * (1.0 - p.b * s_p + p.theta * s_bar_x + p.nu) - w + p.w0
        return np.stack([dc, dw], axis=-1)

    def jacobian(self, x):
        p = self.params
        c, w = self._split(x)
        self._require_positive(c)
        s_p = sigmoid(c, p.c_p, p.gamma)
        s_bar_x = 1.0 - sigmoid(c, p.c_x, p.gamma)
        ds_p = sigmoid_derivative(c, p.c_p, p.gamma)
        ds_x = sigmoid_derivative(c, p.c_x, p.gamma)
        f = buffer(c, p)
        df = buffer_derivative(c, p)

        bracket = p.mu * (1.0 - p.b * s_p - p.theta * s_bar_x - p.nu) + w - p.w0
        dbracket_dc = p.mu * (-p.b * ds_p + p.theta * ds_x)

        jac = np.empty(np.shape(c) + (2, 2))
        jac[..., 0, 0] = dbracket_dc * f + bracket * df
        jac[..., 0, 1] = f
        jac[..., 1, 0] = p.mu * (-p.b * ds_p - p.theta * ds_x)
        jac[..., 1, 1] = -1.0
        return jac

    def diffusion(self, x):
        p = self.params
        c, _ = self._split(x)
        self._require_positive(c)
        eta = np.zeros(np.shape(c) + (2, 2))
        eta[..., 0, 0] = -p.mu * buffer(c, p)
        eta[..., 1, 1] = p.mu
        return eta

    def noise_covariance(self, x):
        p = self.params
        c, _ = self._split(x)
        self._require_positive(c)
        cov = np.zeros(np.shape(c) + (2, 2))
        cov[..., 0, 0] = (p.mu * buffer(c, p)) ** 2
        cov[..., 1, 1] = p.mu ** 2
        return cov

    def noise_covariance_gradient(self, x):
        p = self.params
        c, _ = self._split(x)
        self._require_positive(c)
        grad = np.zeros(np.shape(c) + (2, 2, 2))
        grad[..., 0, 0, 0] = 2.0 * p.mu ** 2 * buffer(c, p) * buffer_derivative(c, p)
        return grad

    def inverse_metric(self, x):
        p = self.params
        c, _ = self._split(x)
        if np.any(c < 0):
            raise MetricSingularityError(f"negative concentration {np.min(c)}")
        f = buffer(c, p)
        if np.any(f < self.f_floor):
            raise MetricSingularityError(
                f"buffer factor {np.min(f):.3e} below floor {self.f_floor:.3e} "
                f"(c < c_min = {self.c_min})"
            )
        metric = np.zeros(np.shape(c) + (2, 2))
        metric[..., 0, 0] = 1.0 / (p.mu * f) ** 2
        metric[..., 1, 1] = 1.0 / p.mu ** 2
        return metric

    def is_admissible(self, x):
        c, _ = self._split(x)
        return bool(np.all(np.isfinite(x)) and np.all(c >= self.c_min))

    def check_admissible(self, x):
        if not self.is_admissible(x):
            c, _ = self._split(x)
            raise DomainError(f"c = {np.min(c)} below the floor c_min = {self.c_min}")

    def point_admissible(self, c, w):
        return math.isfinite(c) and math.isfinite(w) and c >= self.c_min

    def drift_point(self, c, w):
        # Same formulas as drift(), on plain floats
        if c <= 0:
            raise DomainError(f"carbonate concentration must be > 0, got {c}")
        p = self.params
        cg = c ** p.gamma
        s_p = cg / (cg + p.c_p ** p.gamma)
        s_bar_x = 1.0 - cg / (cg + p.c_x ** p.gamma)
        cb = c ** p.beta
        f = p.f0 * (cb / (cb + p.c_f ** p.beta))
        dc = (p.mu * (1.0 - p.b * s_p - p.theta * s_bar_x - p.nu) + w - p.w0) * f
        dw = p.mu * (1.0 - p.b * s_p + p.theta * s_bar_x + p.nu) - w + p.w0
        return dc, dw


def drift(state: State, params: ModelParams) -> np.ndarray:
    """Drift (dc/dt, dw/dt) at a single state."""
    return CarbonateSystem(params).drift(state.as_array())


def diffusion(state: State, params: ModelParams) -> np.ndarray:
    """Noise amplitude [[-mu f(c), 0], [0, mu]] at a single state."""
    return CarbonateSystem(params).diffusion(state.as_array())


def inverse_metric(state: State, params: ModelParams) -> np.ndarray:
    """diag(1/(mu f(c))^2, 1/mu^2) at a single state."""
    return CarbonateSystem(params).inverse_metric(state.as_array())


def jacobian(state: State, params: ModelParams) -> np.ndarray:
    """Analytic Jacobian of the drift at a single state."""
    return CarbonateSystem(params).jacobian(state.as_array())


def finite_difference_jacobian(system: StochasticSystem, x, rel_step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian with step rel_step * max(1, |x_j|)."""
    x = np.asarray(x, dtype=float)
    jac = np.empty((2, 2))
    for j in range(2):
        h = rel_step * max(1.0, abs(x[j]))
        e = np.zeros(2)
        e[j] = h
        jac[:, j] = (system.drift(x + e) - system.drift(x - e)) / (2.0 * h)
    return jac


def check_jacobian(system: StochasticSystem, x, rel_step: float = 1e-5) -> float:
    """
    Relative mismatch between the analytic and finite-difference Jacobians.

    Args:
        system: System to check
        x: State (2-vector)
        rel_step: Relative finite-difference step

    Returns:
        max |J - J_fd| / max(max |J_fd|, 1e-12)
    """
    analytic = system.jacobian(np.asarray(x, dtype=float))
    numeric = finite_difference_jacobian(system, x, rel_step)
    scale = max(float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)
