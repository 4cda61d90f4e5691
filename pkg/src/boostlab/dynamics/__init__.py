"""
Hamiltonian flows in the Cartesian chart.
"""

import math
import logging

import numpy as np

from dataclasses import dataclass
from typing import List, NamedTuple, Optional

from ..phase_space import CartesianState, angular_momentum, radius

dynamics_logger = logging.getLogger("Boostlab.dynamics")

# Below this distance from the origin the integration is stopped
ORIGIN_RADIUS = 1e-6

METHODS = ("RK45", "DOP853", "implicit_midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Integrator settings.

    method is one of RK45 (default, embedded 5(4) pair), DOP853 or implicit_midpoint
    (fixed step given by `step`). The energy drift bound is relative to 1 + |H(s0)|.
    """

    method: str = "RK45"
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_step: float = math.inf
    max_time: float = 1e4
    step: float = 1e-3
    energy_drift_bound: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"Unknown integration method {self.method!r}, choose from {METHODS}.")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("Integrator tolerances must be positive.")
        if not (self.step > 0 and self.max_step > 0):
            raise ValueError("Integrator step sizes must be positive.")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Sampled solution of a Hamiltonian flow.

    times are the elapsed durations of the samples, strictly increasing from 0.
    samples has one row (q1, q2, p1, p2) per time and energy the value of H there.
    """

    times: np.ndarray
    samples: np.ndarray
    energy: np.ndarray
    energy_drift: float
    max_radius: float
    p_theta_drift: float
    drift_ok: bool = True

    @property
    def states(self) -> List[CartesianState]:
        return [CartesianState.from_array(x) for x in self.samples]

    @property
    def final_state(self) -> CartesianState:
        return CartesianState.from_array(self.samples[-1])

    @property
    def radii(self) -> np.ndarray:
        return radius(self.samples.T)

    @property
    def p_theta(self) -> np.ndarray:
        return angular_momentum(self.samples.T)


def make_trajectory(model, times: np.ndarray, samples: np.ndarray, drift_bound: float) -> Trajectory:
    """
    Collect the conservation diagnostics of a sampled flow.
    """
    energy = model.energy_xy(samples.T)
    drift = float(np.max(np.abs(energy - energy[0])))
    p_theta = angular_momentum(samples.T)
    ok = drift <= drift_bound * (1 + abs(energy[0]))
    if not ok:
        dynamics_logger.warning(f"Energy drift {drift:.3e} above the configured bound {drift_bound:.1e}")
    return Trajectory(
        times=times,
        samples=samples,
        energy=energy,
        energy_drift=drift,
        max_radius=float(np.max(radius(samples.T))),
        p_theta_drift=float(np.max(np.abs(p_theta - p_theta[0]))),
        drift_ok=ok,
    )


def rotation(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def free_flow_exact(s0: CartesianState, t: float) -> CartesianState:
    """
    Closed form flow of H0. The kinetic and rotation parts commute, so

        q(t) = R(-t)(q0 + t p0),    p(t) = R(-t) p0

    with R(alpha) the counterclockwise rotation by alpha.
    """
    rot = rotation(-t)
    q = rot @ (s0.position + t * s0.momentum)
    p = rot @ s0.momentum
    return CartesianState(float(q[0]), float(q[1]), float(p[0]), float(p[1]))


class ConfinementResult(NamedTuple):
    confined: bool
    first_exit_time: Optional[float]


def monitor_confinement(traj: Trajectory, R: float) -> ConfinementResult:
    """
    Check whether a trajectory stays in the closed ball of radius R.

    Args:
        traj:   Trajectory, nonempty.
        R:      Radius of the ball.
    Returns:
        (confined, first_exit_time), the exit time linearly interpolated between samples.
    """
    r = traj.radii
    if r.size == 0:
        raise ValueError("Empty trajectory.")
    if traj.max_radius <= R:
        return ConfinementResult(True, None)
    k = int(np.argmax(r > R))
    if k == 0:
        return ConfinementResult(False, float(traj.times[0]))
    t0, t1 = traj.times[k - 1], traj.times[k]
    frac = (R - r[k - 1]) / (r[k] - r[k - 1])
    return ConfinementResult(False, float(t0 + frac * (t1 - t0)))
