"""
Numerical tools for the two-boost problem of magnetic Hamiltonians with decaying potentials.
"""

__author__ = "boostlab developers"
__email__ = "boostlab@users.noreply.github.com"
__version__ = "0.3.1"
__version_tuple__ = tuple(int(x) for x in __version__.split("."))

import os
import pint

from typing import Any, List, Optional

# Initialize registry and a Quantity constructor
ureg = pint.UnitRegistry()
Q_ = ureg.Quantity

# Environment variable capping the number of worker threads
THREADS_ENV = "BOOSTLAB_THREADS"


def split_vector(text: str, size: Optional[int] = None) -> List[float]:
    """
    Split a comma (or space) separated string into a list of floats.

    Args:
        text:   Input string, eg. "0.5,0" or "0.5 0".
        size:   If passed, the expected number of components.
    Returns:
        values: List of floats.
    """
    tokens = [t for t in text.replace(",", " ").split() if t]
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise ValueError(f"Could not interpret {text!r} as a list of numbers.")
    if size is not None and len(values) != size:
        raise ValueError(f"Expected {size} components, got {len(values)} in {text!r}.")
    return values


def units_of_angle(q: Any) -> float:
    """
    Interpret a quantity as an angle, defaulting to radians if dimensionless.

    Args:
        q:      An object that can be interpreted as a pint Quantity, eg. "90deg", "1.2rad" or 0.5.
    Returns:
        The angle in radians, as a float.
    """
    quantity = Q_(q)
    if not quantity.dimensionless:
        raise pint.errors.DimensionalityError(
            quantity, "an angle", quantity.dimensionality, ureg.rad.dimensionality
        )
    return float(quantity.to("radian").magnitude)


def positive_duration(q: Any) -> float:
    """
    Check that a duration is positive and dimensionless.
    Times are nondimensional, so physical units are rejected.

    Args:
        q:          A string or number that can be interpreted as a dimensionless pint Quantity.
    Returns:
        duration:   The value as a float.
    """
    quantity = Q_(q)
    if quantity.unitless is False:
        raise pint.errors.DimensionalityError(
            quantity, "a nondimensional time", quantity.dimensionality, ureg.dimensionless.dimensionality
        )
    duration = float(quantity.magnitude)
    if duration <= 0:
        raise ValueError("Quantity (time) must be positive.")
    return duration


def worker_count(default: Optional[int] = None) -> int:
    """
    Number of worker threads for parallel sampling and shooting.
    BOOSTLAB_THREADS caps the value; otherwise the number of CPUs is used.
    """
    n = default or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)
