"""
Potential models V >= 0 decaying like a/r outside B(R1), with a smooth interior cap.

Inside the disc r <= 0.9*R1 every model is replaced by a constant C, and on [0.9*R1, R1] the
raw potential is blended into C with the cutoff profile, so the models are smooth on all of T*R^2.
For r >= R1 the raw formula is returned unchanged.
"""

import math
import logging
import functools

import numpy as np

from dataclasses import dataclass
from scipy.optimize import minimize
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from . import standard_profile
from ..certify import CertificateReport
from ..errors import InvalidMassRatio, RadiusTooSmall

potentials_logger = logging.getLogger("Boostlab.potentials")

# Fraction of R1 where the interior cap takes over
CAP_START = 0.9


def estimate_sup(value, radius: float, n_r: int = 129, n_theta: int = 128) -> float:
    """
    Estimate the supremum of a potential on the disc of given radius.

    A polar grid locates the largest sample, which is then refined by a bounded local maximization.

    Args:
        value:      Callable (r, theta) -> V, vectorized.
        radius:     Radius of the disc.
        n_r:        Number of radial grid points, r = 0 included.
        n_theta:    Number of angular grid points.
    Returns:
        The estimated sup V.
    """
    r = np.linspace(0.0, radius, n_r)
    theta = np.linspace(-np.pi, np.pi, n_theta, endpoint=False)
    R, TH = np.meshgrid(r, theta, indexing="ij")
    V = value(R, TH)
    i, j = np.unravel_index(np.argmax(V), V.shape)
    best = float(V[i, j])
    res = minimize(
        lambda x: -float(value(x[0], x[1])),
        x0=[R[i, j], TH[i, j]],
        method="L-BFGS-B",
        bounds=[(0.0, radius), (-np.pi, np.pi)],
    )
    if res.success:
        best = max(best, -float(res.fun))
    return best


class PotentialModel:
    """
    Base class of the capped potentials.

    Subclasses provide the raw formula and its derivatives through `_raw(r, theta)`, valid for
    r > 0.9*R1, and the constant `cap_constant` used inside the cap.
    """

    kind = "generic"
    rotationally_invariant = False

    a: float
    R1: float

    def _raw(self, r, theta) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def cap_constant(self) -> float:
        raise NotImplementedError

    @property
    def cap_start(self) -> float:
        return CAP_START * self.R1

    def evaluate(self, r, theta) -> Tuple[Any, Any, Any]:
        """
        Evaluate the potential and its polar derivatives.

        Args:
            r:      Radius, r >= 0.
            theta:  Polar angle in radians.
        Returns:
            (V, dV/dr, dV/dtheta), floats for scalar input and arrays otherwise.
        """
        scalar = np.ndim(r) == 0 and np.ndim(theta) == 0
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        chi = standard_profile()
        width = self.R1 - self.cap_start
        x = (r - self.cap_start) / width
        w = chi(x)
        dw = chi.derivative(x) / width
        outer = r > self.cap_start
        rs = np.where(outer, r, self.R1)
        raw, raw_r, raw_theta = self._raw(rs, theta)
        C = self.cap_constant
        value = np.where(outer, w * C + (1 - w) * raw, C)
        d_r = np.where(outer, dw * (C - raw) + (1 - w) * raw_r, 0.0)
        d_theta = np.where(outer, (1 - w) * raw_theta, 0.0)
        if scalar:
            return float(value), float(d_r), float(d_theta)
        return value, d_r, d_theta

    def value(self, r, theta=0.0):
        return self.evaluate(r, theta)[0]

    def d_r(self, r, theta=0.0):
        return self.evaluate(r, theta)[1]

    def d_theta(self, r, theta=0.0):
        return self.evaluate(r, theta)[2]

    # Cartesian helpers, theta = -atan2(q2, q1)
    def value_xy(self, q1, q2):
        return self.value(np.hypot(q1, q2), -np.arctan2(q2, q1))

    def gradient_xy(self, q1, q2) -> Tuple[Any, Any]:
        """
        Cartesian gradient dV/dq = d_r * q/r + d_theta * (q2, -q1)/r^2, zero at the origin (inside the cap).
        """
        r = np.hypot(q1, q2)
        _, d_r, d_theta = self.evaluate(r, -np.arctan2(q2, q1))
        with np.errstate(divide="ignore", invalid="ignore"):
            g1 = np.where(r > 0, d_r * q1 / r + d_theta * q2 / r**2, 0.0)
            g2 = np.where(r > 0, d_r * q2 / r - d_theta * q1 / r**2, 0.0)
        if np.ndim(g1) == 0:
            return float(g1), float(g2)
        return g1, g2

    @functools.cached_property
    def sup_V(self) -> float:
        return estimate_sup(self.value, 2 * self.R1)

    def to_descriptor(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLawPotential(PotentialModel):
    """
    V = k/r for r >= R1, with k = a unless a different coefficient is given.
    A coefficient larger than a gives a model violating the decay bound.
    """

    a: float
    R1: float
    coefficient: Optional[float] = None

    kind = "powerlaw"
    rotationally_invariant = True

    @property
    def k(self) -> float:
        return self.a if self.coefficient is None else self.coefficient

    def _raw(self, r, theta):
        return self.k / r, -self.k / r**2, np.zeros_like(r)

    @property
    def cap_constant(self) -> float:
        return self.k / self.cap_start

    def to_descriptor(self) -> Dict[str, Any]:
        desc = {"kind": self.kind, "a": self.a, "R1": self.R1}
        if self.coefficient is not None:
            desc["coefficient"] = self.coefficient
        return desc


@dataclass(frozen=True)
class Cr3bpParams:
    mu: float
    R1: float
    a: float


def _check_mass_ratio(mu: float):
    if not 0 < mu <= 0.5:
        raise InvalidMassRatio(f"Mass ratio must be in (0, 1/2], got {mu}.")


def cr3bp_decay_constant(mu: float, R1: float) -> float:
    return (1 - mu) * R1 / (R1 - mu) + mu * R1 / (R1 - (1 - mu))


@dataclass(frozen=True)
class Cr3bpPotential(PotentialModel):
    """
    Gravitational potential of two primaries of masses 1 - mu and mu at (-mu, 0) and (1 - mu, 0)
    in the rotating frame,

        V = (1 - mu)/|q - (-mu, 0)| + mu/|q - (1 - mu, 0)|,

    valid as given for r >= R1 >= 2(1 - mu).
    """

    mu: float
    R1: float
    a: Optional[float] = None

    kind = "cr3bp"

    def __post_init__(self):
        _check_mass_ratio(self.mu)
        if self.R1 < 2 * (1 - self.mu) - 1e-12:
            raise RadiusTooSmall(f"R1 must be at least 2(1 - mu) = {2 * (1 - self.mu)}, got {self.R1}.")
        if self.a is None:
            object.__setattr__(self, "a", cr3bp_decay_constant(self.mu, self.R1))

    def _raw(self, r, theta):
        mu = self.mu
        cos, sin = np.cos(theta), np.sin(theta)
        rho1 = np.sqrt(r**2 + 2 * r * mu * cos + mu**2)
        rho2 = np.sqrt(r**2 - 2 * r * (1 - mu) * cos + (1 - mu) ** 2)
        value = (1 - mu) / rho1 + mu / rho2
        d_r = -(1 - mu) * (r + mu * cos) / rho1**3 - mu * (r - (1 - mu) * cos) / rho2**3
        d_theta = mu * (1 - mu) * r * sin * (1 / rho1**3 - 1 / rho2**3)
        return value, d_r, d_theta

    @property
    def cap_constant(self) -> float:
        # Upper bound of the raw potential on r >= 0.9*R1
        s = self.cap_start
        return (1 - self.mu) / (s - self.mu) + self.mu / (s - (1 - self.mu))

    def to_descriptor(self) -> Dict[str, Any]:
        return {"kind": self.kind, "mu": self.mu, "R1": self.R1, "a": self.a}


def powerlaw_potential(a: float, R1: float) -> PowerLawPotential:
    if a <= 0 or R1 <= 0:
        raise ValueError(f"Power law constants must be positive, got a={a}, R1={R1}.")
    return PowerLawPotential(a, R1)


def cr3bp_potential(mu: float, R1: float, a: Optional[float] = None) -> Cr3bpPotential:
    """
    Capped restricted three body potential.

    Args:
        mu:     Mass ratio in (0, 1/2].
        R1:     Decay radius, R1 >= 2(1 - mu).
        a:      Decay constant. Defaults to (1-mu)R1/(R1-mu) + mu R1/(R1-(1-mu)).
    Returns:
        Cr3bpPotential
    """
    V = Cr3bpPotential(mu, R1, a)
    potentials_logger.debug(f"CR3BP potential with mu={mu}, R1={V.R1}, a={V.a:.6g}")
    return V


def cr3bp_constants(mu: float, q0: Sequence[float], q1: Sequence[float]) -> Cr3bpParams:
    """
    Decay radius and constant for a restricted three body problem with endpoints q0 and q1.

    R1 = max(2(1 - mu), |q0|, |q1|), a = (1 - mu)R1/(R1 - mu) + mu R1/(R1 - (1 - mu)).
    """
    _check_mass_ratio(mu)
    R1 = max(2 * (1 - mu), math.hypot(*q0), math.hypot(*q1))
    return Cr3bpParams(mu, R1, cr3bp_decay_constant(mu, R1))


def verify_decay_conditions(
    V: PotentialModel, r_max: float, n_r: int = 2000, n_theta: int = 64
) -> CertificateReport:
    """
    Check V <= a/r and dV/dr + (2/r) V >= 0 on a grid of [R1, r_max] x [0, 2pi).

    The grid is geometric in r. The first margin is a/r - V, the second dV/dr + 2V/r.
    Both minima must be >= -1e-12, and r^2 V must not decrease along any ray of the grid.
    """
    if r_max <= V.R1:
        raise ValueError(f"r_max = {r_max} must be larger than R1 = {V.R1}.")
    r = np.geomspace(V.R1, r_max, n_r)
    theta = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    R, TH = np.meshgrid(r, theta, indexing="ij")
    value, d_r, _ = V.evaluate(R, TH)
    bound_margin = V.a / R - value
    slope_margin = d_r + 2 * value / R
    m1, m2 = float(bound_margin.min()), float(slope_margin.min())
    worst = bound_margin if m1 <= m2 else slope_margin
    i, j = np.unravel_index(np.argmin(worst), worst.shape)
    # r^2 V nondecreasing in r, the grid version of the second condition
    r2V = R**2 * value
    max_decrease = float((r2V[:-1] - r2V[1:]).max())
    monotone_tol = 1e-12 * (1.0 + float(np.abs(r2V).max()))
    report = CertificateReport(
        name="decay",
        min_margin=min(m1, m2),
        worst_point={"r": float(R[i, j]), "theta": float(TH[i, j])},
        samples=int(R.size),
        tolerance=-1e-12,
        bounds={"r2V_nondecreasing": max_decrease <= monotone_tol},
        details={
            "model": V.to_descriptor(),
            "r_max": r_max,
            "bound_margin": m1,
            "slope_margin": m2,
            "max_decrease_r2V": max_decrease,
        },
    )
    potentials_logger.info(f"Decay conditions on [{V.R1}, {r_max}]: margins {m1:.3e}, {m2:.3e}")
    return report


def parse_descriptor(text: str) -> Dict[str, Any]:
    """
    Parse the descriptor mini-syntax "kind:key=val,..." into a dictionary, eg.
    "cr3bp:mu=0.5" -> {"kind": "cr3bp", "mu": 0.5}.
    """
    kind, _, rest = text.partition(":")
    params: Dict[str, Any] = {"kind": kind.strip().lower()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"Malformed descriptor entry {item!r} in {text!r}.")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise ValueError(f"Descriptor value {val!r} in {text!r} is not a number.")
    return params


def model_from_descriptor(
    desc: Union[str, Dict[str, Any], None],
    q0: Optional[Sequence[float]] = None,
    q1: Optional[Sequence[float]] = None,
) -> Optional[PotentialModel]:
    """
    Build a potential from a descriptor.

    Accepted forms are the mini-syntax "kind:key=val,..." (eg. "powerlaw:a=2,R1=1", "cr3bp:mu=0.5")
    and the dictionary written by `to_descriptor`. "free" (or None) means no potential.
    For "cr3bp" a missing R1 is computed from the endpoints, together with a.

    Args:
        desc:   Descriptor string or dictionary.
        q0, q1: Chord endpoints, used for the CR3BP constants.
    Returns:
        A PotentialModel, or None for the free model.
    """
    if desc is None:
        return None
    params = parse_descriptor(desc) if isinstance(desc, str) else dict(desc)
    kind = str(params.pop("kind", "")).lower()
    if kind in ("free", "none", ""):
        return None
    if kind == "powerlaw":
        unknown = set(params) - {"a", "R1", "coefficient"}
        if unknown or not {"a", "R1"} <= set(params):
            raise ValueError(f"powerlaw descriptor needs a and R1 (and optionally coefficient): {desc!r}")
        if params.get("coefficient") is not None:
            return PowerLawPotential(float(params["a"]), float(params["R1"]), float(params["coefficient"]))
        return powerlaw_potential(float(params["a"]), float(params["R1"]))
    if kind == "cr3bp":
        unknown = set(params) - {"mu", "R1", "a"}
        if unknown or "mu" not in params:
            raise ValueError(f"cr3bp descriptor needs mu (and optionally R1, a): {desc!r}")
        mu = float(params["mu"])
        if params.get("R1") is None:
            consts = cr3bp_constants(mu, q0 or (0.0, 0.0), q1 or (0.0, 0.0))
            return cr3bp_potential(mu, consts.R1, params.get("a") or consts.a)
        a = params.get("a")
        return cr3bp_potential(mu, float(params["R1"]), None if a is None else float(a))
    raise ValueError(f"Unknown potential kind {kind!r}.")
