"""
Multi-start shooting for the two-boost problem.

For each angle psi on the fiber circle over q0 a single dense integration up to max_eta (or
until the orbit escapes) locates durations T where |q(T) - q1| has a small local minimum.
Each such start is polished by a bounded scalar minimization along T and then solved by damped
Newton iterations on F(psi, T) = q(psi, T) - q1.
"""

import math

import numpy as np

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from functools import partial
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar
from typing import List, Optional, Tuple

from . import Chord, ShootingProblem, chords_logger
from .Action import action_terms
from .. import worker_count
from ..dynamics import ORIGIN_RADIUS
from ..errors import BoostlabError, OriginApproach, OutOfRange, StepFailure

# Deduplication radii (dpsi, dT/T)
DEDUP_PSI = 1e-3
DEDUP_T = 1e-3
# Scan points per unit time along a dense trajectory
SCAN_DENSITY = 200
# Endpoint residual and energy deviation a returned chord must stay below
CHORD_TOL = 1e-8


def _origin_event(t, x):
    return math.hypot(x[0], x[1]) - ORIGIN_RADIUS


_origin_event.terminal = True


def _escape_event(radius: float):
    def event(t, x):
        return radius - math.hypot(x[0], x[1])

    event.terminal = True
    return event


def _integrate(problem: ShootingProblem, psi: float, T: float, **kwargs):
    sol = solve_ivp(
        lambda t, x: problem.model.field_xy(x),
        (0.0, T),
        problem.initial_state(psi),
        method=problem.method,
        rtol=problem.rel_tol,
        atol=problem.abs_tol,
        **kwargs,
    )
    if sol.status == -1:
        raise StepFailure(sol.message)
    return sol


def end_state(problem: ShootingProblem, psi: float, T: float) -> np.ndarray:
    sol = _integrate(problem, psi, T, events=_origin_event)
    if sol.status == 1:
        raise OriginApproach(f"Shooting orbit from psi = {psi:.6g} reached the origin.")
    return sol.y[:, -1]


def shoot(problem: ShootingProblem, psi: float, T: float) -> np.ndarray:
    """
    Residual of a shot from the fiber over q0.

    Args:
        problem:    ShootingProblem.
        psi:        Angle on the fiber circle.
        T:          Duration, 0 < T <= max_eta.
    Returns:
        q(T) - q1
    """
    if not 0 < T <= problem.max_eta:
        raise OutOfRange(f"Duration {T} outside (0, {problem.max_eta}].")
    return end_state(problem, psi, T)[:2] - np.asarray(problem.q1)


def scan_seeds(problem: ShootingProblem, psi: float) -> List[float]:
    """
    Durations T near local minima of |q(psi, T) - q1| below seed_radius, at most t_grid_size of them.
    """
    sol = _integrate(
        problem,
        psi,
        problem.max_eta,
        dense_output=True,
        events=[_escape_event(problem.escape_radius), _origin_event],
    )
    T_end = float(sol.t[-1])
    if T_end <= problem.min_eta:
        return []
    n = max(400, int(SCAN_DENSITY * T_end))
    ts = np.union1d(np.geomspace(problem.min_eta, T_end, n), np.linspace(problem.min_eta, T_end, n))
    q1 = np.asarray(problem.q1)
    dist = np.linalg.norm(sol.sol(ts)[:2] - q1[:, None], axis=0)
    interior = np.arange(1, ts.size - 1)
    minima = interior[(dist[interior] <= dist[interior - 1]) & (dist[interior] <= dist[interior + 1])]
    minima = minima[dist[minima] < problem.seed_radius]
    minima = minima[np.argsort(dist[minima], kind="stable")][: problem.t_grid_size]

    seeds = []
    for i in minima:
        res = minimize_scalar(
            lambda T: float(np.sum((sol.sol(T)[:2] - q1) ** 2)),
            bounds=(ts[i - 1], ts[i + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        seeds.append(float(res.x) if res.success else float(ts[i]))
    return sorted(seeds)


def newton(problem: ShootingProblem, psi: float, T: float) -> Optional[Tuple[float, float, float]]:
    """
    Damped Newton iterations on F(psi, T) = q(psi, T) - q1.

    The psi column of the Jacobian is a central difference, the T column the q part of X_H at q(T).
    Steps are halved until |F| decreases, at most six times.

    Returns:
        (psi, T, |F|) on convergence, None otherwise.
    """
    q1 = np.asarray(problem.q1)
    h = problem.fd_step
    try:
        x = end_state(problem, psi, T)
        F = x[:2] - q1
        for it in range(problem.max_newton_iter):
            norm = float(np.linalg.norm(F))
            chords_logger.debug(f"Newton psi={psi:.10f} T={T:.10f} |F|={norm:.3e} (iteration {it})")
            if norm < problem.newton_tol:
                return psi, T, norm
            J = np.empty((2, 2))
            J[:, 0] = (end_state(problem, psi + h, T)[:2] - end_state(problem, psi - h, T)[:2]) / (2 * h)
            J[:, 1] = problem.model.field_xy(x)[:2]
            try:
                d_psi, d_T = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                return None
            lam = 1.0
            while lam >= 1 / 64:
                T_new = T + lam * d_T
                if problem.min_eta <= T_new <= problem.max_eta:
                    x_new = end_state(problem, psi + lam * d_psi, T_new)
                    F_new = x_new[:2] - q1
                    if np.linalg.norm(F_new) < (1 - 1e-4 * lam) * norm:
                        psi, T, x, F = psi + lam * d_psi, T_new, x_new, F_new
                        break
                lam /= 2
            else:
                return None
        norm = float(np.linalg.norm(F))
        return (psi, T, norm) if norm < problem.newton_tol else None
    except (OriginApproach, StepFailure) as err:
        chords_logger.debug(f"Start psi={psi:.6g} T={T:.6g} rejected: {err}")
        return None


def _solve_from(problem: ShootingProblem, psi: float) -> List[Tuple[float, float]]:
    roots = []
    try:
        seeds = scan_seeds(problem, psi)
    except BoostlabError as err:
        chords_logger.debug(f"Scan from psi={psi:.6g} failed: {err}")
        return roots
    for T in seeds:
        root = newton(problem, psi, T)
        if root is not None:
            roots.append((root[0] % (2 * np.pi), root[1]))
    return roots


def _is_duplicate(root: Tuple[float, float], accepted: List[Tuple[float, float]]) -> bool:
    psi, T = root
    for psi_a, T_a in accepted:
        d_psi = abs((psi - psi_a + np.pi) % (2 * np.pi) - np.pi)
        if d_psi < DEDUP_PSI and abs(T - T_a) < DEDUP_T * T_a:
            return True
    return False


def build_chord(problem: ShootingProblem, psi: float, T: float) -> Chord:
    """
    Re-integrate a root and sample it as a chord on [0, 1].
    """
    ts = np.linspace(0.0, T, problem.chord_samples)
    sol = _integrate(problem, psi, T, t_eval=ts)
    samples = sol.y.T
    model = problem.model
    chord = Chord(
        q0=problem.q0,
        q1=problem.q1,
        c=problem.c,
        eta=float(T),
        psi=float(psi),
        times=ts / T,
        samples=samples,
        residual=float(np.linalg.norm(samples[-1, :2] - np.asarray(problem.q1))),
        max_radius=float(np.max(np.hypot(samples[:, 0], samples[:, 1]))),
        energy_deviation=float(np.max(np.abs(model.energy_xy(samples.T) - problem.c))),
    )
    lam, energy = action_terms(chord, model)
    return replace(chord, action=lam - chord.eta * energy, lambda_term=lam, energy_term=energy)


def find_chords(problem: ShootingProblem) -> List[Chord]:
    """
    Solve the two-boost problem by multi-start shooting.

    Args:
        problem:    ShootingProblem.
    Returns:
        Chords with eta >= min_eta passing the positivity filter, sorted by decreasing action,
        then by (psi, eta). The list may be empty.
    """
    psis = 2 * np.pi * np.arange(problem.psi_grid_size) / problem.psi_grid_size
    chords_logger.info(
        f"Shooting from {problem.psi_grid_size} angles, q0={problem.q0}, q1={problem.q1}, c={problem.c}"
    )
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        per_psi = list(pool.map(partial(_solve_from, problem), psis))

    accepted: List[Tuple[float, float]] = []
    for roots in per_psi:
        for root in roots:
            if not _is_duplicate(root, accepted):
                accepted.append(root)

    chords = []
    for psi, T in accepted:
        chord = build_chord(problem, psi, T)
        if chord.residual >= CHORD_TOL:
            chords_logger.debug(f"Root psi={psi:.6g} T={T:.6g} rejected, residual {chord.residual:.3e}")
            continue
        if chord.energy_deviation >= CHORD_TOL:
            chords_logger.debug(
                f"Root psi={psi:.6g} T={T:.6g} rejected, energy deviation {chord.energy_deviation:.3e}"
            )
            continue
        if problem.positive in ("action", "both") and not chord.positive_action:
            continue
        chords.append(chord)
    chords.sort(key=lambda ch: (-ch.action, ch.psi, ch.eta))
    if chords:
        chords_logger.info(f"Found {len(chords)} chord(s), largest action {chords[0].action:.6g}")
    else:
        chords_logger.warning("No chord found.")
    return chords
