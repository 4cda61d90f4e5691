"""
Chords of fixed energy between two cotangent fibers.

A chord is a solution (v, eta) of dv/dt = eta X_H(v) on [0, 1] with v in H^-1(c), v(0) over q0 and
v(1) over q1. eta is the physical duration of the unit speed flow.
"""

import math
import logging

import numpy as np

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from ..errors import EmptyFiber

chords_logger = logging.getLogger("Boostlab.chords")

POSITIVE_FILTERS = ("eta", "action", "both")


@dataclass(frozen=True)
class FiberCircle:
    """
    The points of the fiber over q on the level H = c.

    Completing the square, H0 = |p + A(q)|^2/2 - |q|^2/2 with A(q) = (q2, -q1), so the fiber is the
    circle of momenta around (-q2, q1) with radius sqrt(2(c + W(q)) + |q|^2).
    """

    q: Tuple[float, float]
    c: float
    center: Tuple[float, float]
    radius: float

    def momentum(self, psi) -> np.ndarray:
        return np.array([self.center[0] + self.radius * np.cos(psi), self.center[1] + self.radius * np.sin(psi)])

    def state(self, psi) -> np.ndarray:
        p = self.momentum(psi)
        return np.array([self.q[0], self.q[1], p[0], p[1]])


def fiber_circle(model, q, c: float) -> FiberCircle:
    """
    Fiber circle of the model at base point q and energy c.

    Args:
        model:  HamiltonianModel.
        q:      Base point (q1, q2).
        c:      Energy value.
    Returns:
        FiberCircle
    Raises:
        EmptyFiber: if 2(c + W(q)) + |q|^2 < 0.
    """
    q1, q2 = float(q[0]), float(q[1])
    W = float(model.level_potential(math.hypot(q1, q2), -math.atan2(q2, q1)))
    radius2 = 2 * (c + W) + q1**2 + q2**2
    if radius2 < 0:
        raise EmptyFiber(f"No point over q = ({q1}, {q2}) has energy {c}: radius^2 = {radius2:.6g}.")
    if radius2 == 0:
        chords_logger.warning(f"Fiber over q = ({q1}, {q2}) at energy {c} is a single point.")
    return FiberCircle((q1, q2), c, (-q2, q1), math.sqrt(radius2))


@dataclass(frozen=True)
class ShootingProblem:
    """
    Two-boost problem for a model at energy c, solved by shooting over (psi, T).

    psi parametrizes the fiber circle over q0 and T is the duration. Shooting starts come from a
    grid of psi_grid_size angles with at most t_grid_size durations each.
    """

    model: Any
    q0: Tuple[float, float]
    q1: Tuple[float, float]
    c: float
    psi_grid_size: int = 64
    t_grid_size: int = 16
    min_eta: float = 1e-3
    max_eta: float = 50.0
    newton_tol: float = 1e-10
    max_newton_iter: int = 40
    fd_step: float = 1e-7
    method: str = "DOP853"
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    escape_radius: Optional[float] = None
    seed_radius: Optional[float] = None
    chord_samples: int = 2001
    positive: str = "eta"
    fiber: FiberCircle = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "q0", (float(self.q0[0]), float(self.q0[1])))
        object.__setattr__(self, "q1", (float(self.q1[0]), float(self.q1[1])))
        if not 0 < self.min_eta < self.max_eta:
            raise ValueError(f"Need 0 < min_eta < max_eta, got {self.min_eta}, {self.max_eta}.")
        if self.psi_grid_size < 1 or self.t_grid_size < 1:
            raise ValueError("Grid sizes must be positive.")
        if self.positive not in POSITIVE_FILTERS:
            raise ValueError(f"positive must be one of {POSITIVE_FILTERS}, got {self.positive!r}.")
        object.__setattr__(self, "fiber", fiber_circle(self.model, self.q0, self.c))
        scale = max(
            self.model.potential.R1 if self.model.potential is not None else 1.0,
            math.hypot(*self.q0),
            math.hypot(*self.q1),
        )
        if self.escape_radius is None:
            object.__setattr__(self, "escape_radius", 20 * scale)
        if self.seed_radius is None:
            object.__setattr__(self, "seed_radius", 0.25 * scale)

    def initial_state(self, psi: float) -> np.ndarray:
        return self.fiber.state(psi)


@dataclass(frozen=True, eq=False)
class Chord:
    """
    A chord sampled at times t_k in [0, 1].

    samples holds the states (q1, q2, p1, p2) at t_k, eta the duration and psi the angle of the
    initial momentum on the fiber circle over q0.
    """

    q0: Tuple[float, float]
    q1: Tuple[float, float]
    c: float
    eta: float
    psi: float
    times: np.ndarray
    samples: np.ndarray
    residual: float
    max_radius: float
    energy_deviation: float
    action: float = math.nan
    lambda_term: float = math.nan
    energy_term: float = math.nan

    @property
    def positive_action(self) -> bool:
        return self.action > 0

    def to_json(self, include_samples: bool = True) -> Dict[str, Any]:
        data = {
            "q0": list(self.q0),
            "q1": list(self.q1),
            "c": self.c,
            "eta": self.eta,
            "psi": self.psi,
            "action": self.action,
            "lambda_term": self.lambda_term,
            "energy_term": self.energy_term,
            "positive_action": self.positive_action,
            "residual": self.residual,
            "max_radius": self.max_radius,
            "energy_deviation": self.energy_deviation,
        }
        if include_samples:
            data["samples"] = [[float(t), *map(float, x)] for t, x in zip(self.times, self.samples)]
        return data
