"""
Phase space states of T*R^2 in Cartesian and polar charts.

The polar angle is measured clockwise, theta = -atan2(q2, q1), so that the conjugate momentum is
p_theta = p1*q2 - p2*q1 and the magnetic Hamiltonian reads the same in both charts:

    H0 = (p1^2 + p2^2)/2 + p1*q2 - p2*q1 = p_r^2/2 + p_theta^2/(2 r^2) + p_theta

With the usual counterclockwise angle the sign of the magnetic term would flip.
"""

import math

import numpy as np

from dataclasses import dataclass
from typing import Callable, Union

from .errors import OriginSingularity, NonpositiveRadius

# Default central difference step
FD_STEP = 1e-5


@dataclass(frozen=True)
class CartesianState:
    q1: float
    q2: float
    p1: float
    p2: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.q1, self.q2, self.p1, self.p2)):
            raise ValueError(f"State components must be finite: {self}")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.q1, self.q2])

    @property
    def momentum(self) -> np.ndarray:
        return np.array([self.p1, self.p2])

    @property
    def radius(self) -> float:
        return math.hypot(self.q1, self.q2)

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.p1, self.p2], dtype=float)

    @classmethod
    def from_array(cls, x) -> "CartesianState":
        return cls(*(float(v) for v in x[:4]))


@dataclass(frozen=True)
class PolarState:
    r: float
    theta: float
    p_r: float
    p_theta: float

    def __post_init__(self):
        if not self.r > 0:
            raise NonpositiveRadius(f"Polar radius must be positive, got {self.r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.theta, self.p_r, self.p_theta], dtype=float)

    @classmethod
    def from_array(cls, y) -> "PolarState":
        return cls(*(float(v) for v in y[:4]))


State = Union[CartesianState, PolarState]


# Array versions, components along the first axis: x = (q1, q2, p1, p2), y = (r, theta, p_r, p_theta)
def cartesian_to_polar_array(x: np.ndarray) -> np.ndarray:
    q1, q2, p1, p2 = x[0], x[1], x[2], x[3]
    r = np.hypot(q1, q2)
    if np.any(r == 0):
        raise OriginSingularity("Polar chart is undefined at the origin.")
    theta = -np.arctan2(q2, q1)
    # angles in (-pi, pi]
    theta = np.where(theta == -np.pi, np.pi, theta)
    p_r = (q1 * p1 + q2 * p2) / r
    p_theta = p1 * q2 - p2 * q1
    return np.stack([r, theta, p_r, p_theta])


def polar_to_cartesian_array(y: np.ndarray) -> np.ndarray:
    r, theta, p_r, p_theta = y[0], y[1], y[2], y[3]
    if np.any(r <= 0):
        raise NonpositiveRadius("Polar radius must be positive.")
    c, s = np.cos(theta), np.sin(theta)
    q1 = r * c
    q2 = -r * s
    # p = p_r * e_r + (p_theta / r) * e_perp, with e_r = (c, -s) and e_perp = (q2, -q1)/r = (-s, -c)
    w = p_theta / r
    p1 = p_r * c - w * s
    p2 = -p_r * s - w * c
    return np.stack([q1, q2, p1, p2])


def to_polar(s: CartesianState) -> PolarState:
    """
    Change chart from Cartesian to polar coordinates.

    Args:
        s:  Cartesian state, away from the origin.
    Returns:
        Polar state (r, theta, p_r, p_theta), theta in (-pi, pi].
    """
    if s.q1 == 0 and s.q2 == 0:
        raise OriginSingularity("Polar chart is undefined at the origin.")
    return PolarState.from_array(cartesian_to_polar_array(s.as_array()))


def to_cartesian(s: PolarState) -> CartesianState:
    """
    Change chart from polar to Cartesian coordinates, inverse of to_polar.
    """
    if not s.r > 0:
        raise NonpositiveRadius(f"Polar radius must be positive, got {s.r}")
    return CartesianState.from_array(polar_to_cartesian_array(s.as_array()))


def as_cartesian_array(s: Union[State, np.ndarray]) -> np.ndarray:
    if isinstance(s, PolarState):
        return polar_to_cartesian_array(s.as_array())
    if isinstance(s, CartesianState):
        return s.as_array()
    return np.asarray(s, dtype=float)


# Frequently used phase space functions
def radius(x: np.ndarray):
    return np.hypot(x[0], x[1])


def angular_momentum(x: np.ndarray):
    return x[2] * x[1] - x[3] * x[0]


def radial_momentum(x: np.ndarray):
    return (x[0] * x[2] + x[1] * x[3]) / np.hypot(x[0], x[1])


def gradient_fd(f: Callable, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """
    Central difference gradient of a scalar function of x = (q1, q2, p1, p2).
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2 * h)
    return grad


def poisson_bracket_fd(
    f: Callable, g: Callable, s: Union[State, np.ndarray], h: float = FD_STEP
) -> float:
    """
    Finite difference Poisson bracket

        {f, g} = sum_i (df/dp_i dg/dq_i - df/dq_i dg/dp_i)

    With this sign convention {H, g} is the derivative of g along the flow of H, eg. {H, r} = p_r.

    Args:
        f, g:   Scalar functions of the Cartesian array (q1, q2, p1, p2).
        s:      Point where the bracket is evaluated, in either chart.
        h:      Central difference step. The caller owns the choice.
    Returns:
        Approximation of {f, g}(s).
    """
    x = as_cartesian_array(s)
    df = gradient_fd(f, x, h)
    dg = gradient_fd(g, x, h)
    return float(df[2] * dg[0] + df[3] * dg[1] - df[0] * dg[2] - df[1] * dg[3])
