"""
Samplers for energy level sets in the polar chart.

On a level set H = c the free part satisfies H0 = c + W(r, theta) =: L, i.e.

    p_r^2/2 + p_theta^2/(2 r^2) + p_theta = L

so for fixed (r, theta) the admissible angular momenta form an interval and p_r follows
from a square root. Turning points (p_r = 0) are the two endpoints of that interval.
"""

import numpy as np

from typing import Tuple

# Leading samples of each batch pinned to the boundary of the box
PINNED = 4


def p_theta_interval(r, level) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Admissible p_theta interval [-r^2 - sqrt(D), -r^2 + sqrt(D)], D = r^4 + 2 r^2 L.

    Returns:
        (lo, hi, ok) with ok marking the radii where the interval is nonempty.
    """
    r2 = r**2
    disc = r2**2 + 2 * r2 * level
    ok = disc >= 0
    root = np.sqrt(np.where(ok, disc, 0.0))
    lo = -r2 - root
    # -r^2 + sqrt(D) written without cancellation
    hi = 2 * r2 * level / (r2 + root)
    return lo, hi, ok


def radial_momentum_on_level(r, level, p_theta):
    """
    |p_r| on the level set, clipped at zero where rounding makes the radicand slightly negative.
    """
    return np.sqrt(np.maximum(2 * (level - p_theta) - p_theta**2 / r**2, 0.0))


def sample_radii(rng: np.random.Generator, n: int, r_lo: float, r_hi: float) -> np.ndarray:
    r = rng.uniform(r_lo, r_hi, n)
    # endpoints included
    r[:PINNED:2] = r_lo
    r[1:PINNED:2] = r_hi
    return r


def sample_level_set(model, c: float, r_lo: float, r_hi: float, rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Sample n points of the level set H = c with r in [r_lo, r_hi].

    p_theta is drawn uniformly in the admissible interval, the sign of p_r at random. The first
    samples sit at the radial endpoints and at the ends of the p_theta interval.

    Args:
        model:  HamiltonianModel.
        c:      Energy value.
        r_lo, r_hi: Radial range, r_lo > 0.
        rng:    Random number generator.
        n:      Number of samples.
    Returns:
        Polar states, shape (4, m) with m <= n points where the level set is nonempty.
    """
    r = sample_radii(rng, n, r_lo, r_hi)
    theta = rng.uniform(-np.pi, np.pi, n)
    level = c + model.level_potential(r, theta)
    lo, hi, ok = p_theta_interval(r, level)
    u = rng.uniform(0.0, 1.0, n)
    u[:PINNED] = [0.0, 1.0, 1.0, 0.0][: min(PINNED, n)]
    p_theta = lo + u * (hi - lo)
    p_r = radial_momentum_on_level(r, level, p_theta) * rng.choice([-1.0, 1.0], n)
    y = np.stack([r, theta, p_r, p_theta])
    return y[:, ok]


def sample_turning_points(
    model, levels, r_lo: float, r_hi: float, rng: np.random.Generator, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sample turning points p_r = 0 on level sets, both roots of the p_theta quadratic per (r, theta).

    Args:
        model:  HamiltonianModel.
        levels: Energy value, or array of n energy values.
        r_lo, r_hi: Radial range, r_lo > 0.
        rng:    Random number generator.
        n:      Number of (r, theta) draws.
    Returns:
        Polar states with p_r = 0, shape (4, m) with m <= 2n, and the energy of each state.
    """
    r = sample_radii(rng, n, r_lo, r_hi)
    theta = rng.uniform(-np.pi, np.pi, n)
    energy = np.broadcast_to(np.asarray(levels, dtype=float), r.shape)
    level = energy + model.level_potential(r, theta)
    lo, hi, ok = p_theta_interval(r, level)
    y = np.concatenate(
        [
            np.stack([r, theta, np.zeros(n), lo]),
            np.stack([r, theta, np.zeros(n), hi]),
        ],
        axis=1,
    )
    keep = np.concatenate([ok, ok])
    return y[:, keep], np.concatenate([energy, energy])[keep]
