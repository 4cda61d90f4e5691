"""
Action functional of chords,

    A(v, eta) = int_0^1 lambda(dv/dt) dt - eta int_0^1 (H - c)(v) dt,    lambda = p dq
"""

from scipy.integrate import simpson
from typing import Tuple

from . import Chord

# Slack on the confinement radius
CONFINEMENT_SLACK = 1e-9


def action_terms(chord: Chord, model) -> Tuple[float, float]:
    """
    The two terms of the action evaluated by Simpson's rule on the chord samples.

    dq/dt is taken from the vector field, eta times the q part of X_H.

    Returns:
        (int p.dq/dt dt, int (H - c) dt)
    """
    x = chord.samples.T
    qdot = chord.eta * model.field_xy(x)[:2]
    lam = simpson(x[2] * qdot[0] + x[3] * qdot[1], x=chord.times)
    energy = simpson(model.energy_xy(x) - chord.c, x=chord.times)
    return float(lam), float(energy)


def rabinowitz_action(chord: Chord, model) -> float:
    lam, energy = action_terms(chord, model)
    return lam - chord.eta * energy


def check_confinement(chord: Chord, R1: float, slack: float = CONFINEMENT_SLACK) -> bool:
    """True if the chord stays in the closed ball of radius R1."""
    return bool(chord.max_radius <= R1 + slack)
