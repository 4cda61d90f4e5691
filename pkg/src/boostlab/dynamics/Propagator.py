"""
Propagation of Hamiltonian flows with scipy's embedded Runge-Kutta pairs or the implicit midpoint rule.
"""

import math

import numpy as np

from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import fsolve
from typing import Optional, Sequence, Union

from . import (
    ORIGIN_RADIUS,
    IntegratorConfig,
    Trajectory,
    dynamics_logger,
    make_trajectory,
)
from .. import positive_duration
from ..errors import OriginApproach, StepFailure
from ..phase_space import CartesianState, as_cartesian_array


def origin_event(t, x):
    return math.hypot(x[0], x[1]) - ORIGIN_RADIUS


origin_event.terminal = True
origin_event.direction = -1


def signed_field(model, sign: float):
    def fun(t, x):
        return sign * model.field_xy(x)

    return fun


def _implicit_midpoint(fun, x0: np.ndarray, T: float, step: float):
    n = max(1, int(math.ceil(T / step)))
    h = T / n
    ts = np.linspace(0.0, T, n + 1)
    xs = np.empty((n + 1, x0.size))
    xs[0] = x0
    for k in range(n):
        x = xs[k]

        def stage(z):
            return z - x - h * fun(ts[k], 0.5 * (x + z))

        z, info, ier, msg = fsolve(stage, x + h * fun(ts[k], x), full_output=True, xtol=1e-14)
        if ier != 1 and np.max(np.abs(info["fvec"])) > 1e-12 * (1 + np.max(np.abs(z))):
            raise StepFailure(f"Implicit midpoint stage failed at t = {ts[k]:.6g}: {msg}")
        if math.hypot(z[0], z[1]) < ORIGIN_RADIUS:
            raise OriginApproach(f"Trajectory reached |q| < {ORIGIN_RADIUS} at t = {ts[k + 1]:.6g}.")
        xs[k + 1] = z
    dxs = np.array([fun(t, x) for t, x in zip(ts, xs)])
    return CubicHermiteSpline(ts, xs, dxs, axis=0)


def flow(
    model,
    s0: Union[CartesianState, np.ndarray],
    T: Union[float, str],
    cfg: Optional[IntegratorConfig] = None,
    t_eval: Optional[Sequence[float]] = None,
    n_samples: int = 1001,
    backward: bool = False,
) -> Trajectory:
    """
    Integrate the Hamiltonian flow of a model for a duration T.

    Args:
        model:      HamiltonianModel.
        s0:         Initial state.
        T:          Duration, T > 0.
        cfg:        IntegratorConfig, defaults to RK45 at tolerance 1e-12.
        t_eval:     Elapsed times where the solution is sampled. Defaults to n_samples equispaced times.
        n_samples:  Number of samples if t_eval is not given.
        backward:   If True, flow backward in time. Sample times are still elapsed durations.
    Returns:
        Trajectory
    Raises:
        OriginApproach: if |q| drops below 1e-6.
        StepFailure:    if the integrator gives up.
    """
    cfg = cfg or IntegratorConfig()
    T = positive_duration(T)
    if T > cfg.max_time:
        raise ValueError(f"Duration {T} exceeds the configured maximum {cfg.max_time}.")
    x0 = as_cartesian_array(s0)
    ts = np.linspace(0.0, T, n_samples) if t_eval is None else np.asarray(t_eval, dtype=float)
    sign = -1.0 if backward else 1.0
    fun = signed_field(model, sign)

    if cfg.method == "implicit_midpoint":
        dense = _implicit_midpoint(fun, x0, T, min(cfg.step, cfg.max_step))
        samples = dense(ts)
    else:
        sol = solve_ivp(
            fun,
            (0.0, T),
            x0,
            method=cfg.method,
            t_eval=ts,
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
            max_step=cfg.max_step,
            events=origin_event,
        )
        if sol.status == 1:
            raise OriginApproach(
                f"Trajectory reached |q| < {ORIGIN_RADIUS} at t = {sol.t_events[0][0]:.6g}."
            )
        if sol.status != 0:
            raise StepFailure(sol.message)
        samples = sol.y.T
    dynamics_logger.debug(f"Flow of {model.kind.value} model for T = {T:.6g} with {cfg.method}")
    return make_trajectory(model, ts, samples, cfg.energy_drift_bound)
