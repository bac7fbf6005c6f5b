"""
Reference systems with analytically known quasi-potentials and cycles.

Used to validate the minimum action solver and the phase-plane tools
independently of the carbonate parameter set.
"""
import math

import numpy as np

from .system import StochasticSystem


class _DiagonalNoise:
    """Constant noise diag(sigma_x, sigma_y); a scalar sigma is isotropic."""
    sigma = 1.0

    @property
    def noise_scales(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.sigma, dtype=float), (2,))

    def _constant(self, matrix, x):
        return np.broadcast_to(matrix, np.shape(x)[:-1] + (2, 2)).copy()

    def diffusion(self, x):
        return self._constant(np.diag(self.noise_scales), x)

    def noise_covariance(self, x):
        return self._constant(np.diag(self.noise_scales ** 2), x)

    def inverse_metric(self, x):
        return self._constant(np.diag(1.0 / self.noise_scales ** 2), x)


class DoubleWellSystem(_DiagonalNoise, StochasticSystem):
    """dX = -grad U dt + dB with U(x, y) = (x^2 - 1)^2 + y^2."""

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        return (x[..., 0] ** 2 - 1.0) ** 2 + x[..., 1] ** 2

    def drift(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([-4.0 * x[..., 0] * (x[..., 0] ** 2 - 1.0), -2.0 * x[..., 1]], axis=-1)

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        jac = np.zeros(x.shape[:-1] + (2, 2))
        jac[..., 0, 0] = 4.0 - 12.0 * x[..., 0] ** 2
        jac[..., 1, 1] = -2.0
        return jac

    def drift_point(self, x, y):
        return -4.0 * x * (x * x - 1.0), -2.0 * y


class LinearSystem(_DiagonalNoise, StochasticSystem):
    """dX = M X dt + dB; the default M = -I has quasi-potential |x|^2 from the origin."""

    def __init__(self, matrix=None):
        self.matrix = -np.eye(2) if matrix is None else np.asarray(matrix, dtype=float)

    def drift(self, x):
        return np.einsum("ij,...j->...i", self.matrix, np.asarray(x, dtype=float))

    def jacobian(self, x):
        return np.broadcast_to(self.matrix, np.shape(x)[:-1] + (2, 2)).copy()

    def drift_point(self, x, y):
        m = self.matrix
        return m[0, 0] * x + m[0, 1] * y, m[1, 0] * x + m[1, 1] * y


class BistableOscillator(_DiagonalNoise, StochasticSystem):
    """
    Planar normal form with a stable focus, an unstable and a stable cycle.

    In polar form dr/dt = r g(r^2), dtheta/dt = omega, with
    g(q) = a + b q - q^2. For a < 0 < b and b^2 + 4a > 0 the origin is
    stable, r^2 = (b - sqrt(b^2 + 4a)) / 2 is an unstable cycle and
    r^2 = (b + sqrt(b^2 + 4a)) / 2 a stable one. sigma may be a pair
    (sigma_x, sigma_y) for anisotropic noise, which breaks the rotational
    symmetry of the escape.
    """

    def __init__(self, a: float = -1.0, b: float = 3.0, omega: float = 1.0, sigma=1.0):
        if not (a < 0 < b and b * b + 4 * a > 0):
            raise ValueError(f"parameters a={a}, b={b} do not give two cycles")
        self.a = a
        self.b = b
        self.omega = omega
        self.sigma = sigma

    @property
    def unstable_radius(self) -> float:
        return math.sqrt((self.b - math.sqrt(self.b ** 2 + 4 * self.a)) / 2)

    @property
    def stable_radius(self) -> float:
        return math.sqrt((self.b + math.sqrt(self.b ** 2 + 4 * self.a)) / 2)

    def _g(self, q):
        return self.a + self.b * q - q * q

    def drift(self, x):
        x = np.asarray(x, dtype=float)
        u, v = x[..., 0], x[..., 1]
        g = self._g(u * u + v * v)
        return np.stack([u * g - self.omega * v, v * g + self.omega * u], axis=-1)

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        u, v = x[..., 0], x[..., 1]
        q = u * u + v * v
        g = self._g(q)
        dg = self.b - 2.0 * q
        jac = np.empty(x.shape[:-1] + (2, 2))
        jac[..., 0, 0] = g + 2.0 * u * u * dg
        jac[..., 0, 1] = 2.0 * u * v * dg - self.omega
        jac[..., 1, 0] = 2.0 * u * v * dg + self.omega
        jac[..., 1, 1] = g + 2.0 * v * v * dg
        return jac

    def drift_point(self, u, v):
        g = self._g(u * u + v * v)
        return u * g - self.omega * v, v * g + self.omega * u
