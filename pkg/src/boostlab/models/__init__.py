"""
Potentials, cutoff functions and Hamiltonian models.
"""

import functools

import numpy as np

from scipy.special import expit

# inf chi' >= -2 is required of the cutoff profile
SLOPE_BOUND = -2.0


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


class CutoffProfile:
    """
    Smooth non-increasing transition chi: R -> [0, 1] with chi = 1 on (-inf, 0], chi = 0 on [1, inf).

    chi(x) = expit(u(x)) with u(x) = 1/x - 1/(1 - x) on (0, 1). The steepest slope is attained at
    x = 1/2 where chi'(1/2) = -2 exactly.
    """

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        inside = (x_arr > 0) & (x_arr < 1)
        xs = np.where(inside, x_arr, 0.5)
        u = 1.0 / xs - 1.0 / (1.0 - xs)
        value = np.where(x_arr <= 0, 1.0, np.where(x_arr >= 1, 0.0, expit(u)))
        return _scalar_or_array(value, x)

    def derivative(self, x):
        x_arr = np.asarray(x, dtype=float)
        inside = (x_arr > 0) & (x_arr < 1)
        xs = np.where(inside, x_arr, 0.5)
        u = 1.0 / xs - 1.0 / (1.0 - xs)
        s = expit(u) * expit(-u)
        with np.errstate(over="ignore", invalid="ignore"):
            du = 1.0 / xs**2 + 1.0 / (1.0 - xs) ** 2
            d = np.where(s > 0, -s * du, 0.0)
        value = np.where(inside, d, 0.0)
        return _scalar_or_array(value, x)

    def min_slope(self, n: int = 200001) -> float:
        """Infimum of the sampled derivative on a dense grid of [0, 1]."""
        return float(np.min(self.derivative(np.linspace(0.0, 1.0, n))))


@functools.lru_cache(maxsize=None)
def standard_profile() -> CutoffProfile:
    """
    The profile shared by the potential caps and the truncation cutoffs,
    checked once against the slope bound.
    """
    profile = CutoffProfile()
    slope = profile.min_slope()
    if slope < SLOPE_BOUND - 1e-9:
        raise ValueError(f"Cutoff profile violates inf chi' >= -2: {slope}")
    return profile


from .Potentials import model_from_descriptor  # noqa: E402,F401
