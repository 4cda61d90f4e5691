"""
The magnetic Hamiltonian H0, the full model H = H0 - V and the truncated model H1 = H0 - chi0*chi1*V.

Evaluation and vector fields work on arrays with the four components along the first axis,
x = (q1, q2, p1, p2) in the Cartesian chart and y = (r, theta, p_r, p_theta) in the polar one.
The vector field is X_H = (dH/dp, -dH/dq).
"""

import logging

import numpy as np

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

from . import CutoffProfile, standard_profile
from .Potentials import PotentialModel
from ..certify import CertificateReport
from ..errors import BadRadii
from ..phase_space import CartesianState, PolarState, State

hamiltonians_logger = logging.getLogger("Boostlab.hamiltonians")


class Kind(Enum):
    FREE = "free"
    FULL = "full"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class CutoffConfig:
    """
    Radial and energy cutoffs

        chi0(r) = chi((r - R1)/(R2 - R1)),    chi1(h0) = chi(h0 - sup_V - c)
    """

    R1: float
    R2: float
    c: float
    sup_V: float
    profile: CutoffProfile = field(default_factory=standard_profile)

    def __post_init__(self):
        if not self.R2 > self.R1:
            raise BadRadii(f"Truncation radius R2 = {self.R2} must be larger than R1 = {self.R1}.")

    def chi0(self, r):
        return self.profile((r - self.R1) / (self.R2 - self.R1))

    def dchi0(self, r):
        return self.profile.derivative((r - self.R1) / (self.R2 - self.R1)) / (self.R2 - self.R1)

    def chi1(self, h0):
        return self.profile(h0 - self.sup_V - self.c)

    def dchi1(self, h0):
        return self.profile.derivative(h0 - self.sup_V - self.c)


def free_energy_xy(x):
    return 0.5 * (x[2] ** 2 + x[3] ** 2) + x[2] * x[1] - x[3] * x[0]


def free_energy_polar(y):
    return 0.5 * y[2] ** 2 + 0.5 * y[3] ** 2 / y[0] ** 2 + y[3]


@dataclass(frozen=True)
class HamiltonianModel:
    kind: Kind
    potential: Optional[PotentialModel] = None
    cutoff: Optional[CutoffConfig] = None

    def __post_init__(self):
        if self.kind is not Kind.FREE and self.potential is None:
            raise ValueError(f"A {self.kind.value} Hamiltonian needs a potential.")
        if self.kind is Kind.TRUNCATED and self.cutoff is None:
            raise ValueError("A truncated Hamiltonian needs a cutoff configuration.")

    @property
    def rotationally_invariant(self) -> bool:
        return self.potential is None or self.potential.rotationally_invariant

    # Perturbation W, with H = H0 - W
    def perturbation_polar(self, y) -> Tuple:
        """
        The perturbation W and its partial derivatives in the polar chart.

        Returns:
            (W, dW/dp_r, dW/dp_theta, dW/dr, dW/dtheta)
        """
        r, theta, p_r, p_theta = y[0], y[1], y[2], y[3]
        zero = np.zeros_like(np.asarray(r, dtype=float))
        if self.kind is Kind.FREE:
            return zero, zero, zero, zero, zero
        V, V_r, V_theta = self.potential.evaluate(r, theta)
        if self.kind is Kind.FULL:
            return V + zero, zero, zero, V_r + zero, V_theta + zero
        cut = self.cutoff
        h0 = free_energy_polar(y)
        chi0, dchi0 = cut.chi0(r), cut.dchi0(r)
        chi1, dchi1 = cut.chi1(h0), cut.dchi1(h0)
        common = chi0 * V * dchi1
        W = chi0 * chi1 * V
        W_pr = common * p_r
        W_pth = common * (p_theta / r**2 + 1)
        W_r = chi1 * (dchi0 * V + chi0 * V_r) - common * p_theta**2 / r**3
        W_theta = chi1 * chi0 * V_theta
        return W, W_pr, W_pth, W_r, W_theta

    def perturbation_xy(self, x) -> Tuple:
        """
        The perturbation W and its gradients (dW/dq, dW/dp) in the Cartesian chart.
        """
        q1, q2, p1, p2 = x[0], x[1], x[2], x[3]
        zero = np.zeros_like(np.asarray(q1, dtype=float))
        if self.kind is Kind.FREE:
            return zero, (zero, zero), (zero, zero)
        r = np.hypot(q1, q2)
        V, _, _ = self.potential.evaluate(r, -np.arctan2(q2, q1))
        g1, g2 = self.potential.gradient_xy(q1, q2)
        if self.kind is Kind.FULL:
            return V + zero, (g1 + zero, g2 + zero), (zero, zero)
        cut = self.cutoff
        h0 = free_energy_xy(x)
        chi0, dchi0 = cut.chi0(r), cut.dchi0(r)
        chi1, dchi1 = cut.chi1(h0), cut.dchi1(h0)
        common = chi0 * V * dchi1
        with np.errstate(divide="ignore", invalid="ignore"):
            u1 = np.where(r > 0, q1 / r, 0.0)
            u2 = np.where(r > 0, q2 / r, 0.0)
        W = chi0 * chi1 * V
        # dH0/dq = (-p2, p1), dH0/dp = p + (q2, -q1)
        W_q1 = chi1 * (dchi0 * V * u1 + chi0 * g1) + common * (-p2)
        W_q2 = chi1 * (dchi0 * V * u2 + chi0 * g2) + common * p1
        W_p1 = common * (p1 + q2)
        W_p2 = common * (p2 - q1)
        return W, (W_q1, W_q2), (W_p1, W_p2)

    def level_potential(self, r, theta):
        """
        The perturbation restricted to level sets H = c, where chi1 = 1, so that H = c reads H0 = c + W.
        """
        r = np.asarray(r, dtype=float)
        if self.kind is Kind.FREE:
            return np.zeros_like(r)
        V = self.potential.value(r, theta)
        if self.kind is Kind.FULL:
            return V
        return self.cutoff.chi0(r) * V

    # Energies
    def energy_xy(self, x):
        return free_energy_xy(x) - self.perturbation_xy(x)[0]

    def energy_polar(self, y):
        return free_energy_polar(y) - self.perturbation_polar(y)[0]

    def evaluate(self, s: Union[State, np.ndarray]) -> float:
        """
        Energy of a state, given in either chart. Bare arrays are read as Cartesian.
        """
        if isinstance(s, PolarState):
            return float(self.energy_polar(s.as_array()))
        if isinstance(s, CartesianState):
            return float(self.energy_xy(s.as_array()))
        return self.energy_xy(np.asarray(s, dtype=float))

    # Vector fields
    def field_xy(self, x) -> np.ndarray:
        q1, q2, p1, p2 = x[0], x[1], x[2], x[3]
        _, (W_q1, W_q2), (W_p1, W_p2) = self.perturbation_xy(x)
        return np.stack(
            [
                p1 + q2 - W_p1,
                p2 - q1 - W_p2,
                p2 + W_q1,
                -p1 + W_q2,
            ]
        )

    def field_polar(self, y) -> np.ndarray:
        r, p_r, p_theta = y[0], y[2], y[3]
        _, W_pr, W_pth, W_r, W_theta = self.perturbation_polar(y)
        return np.stack(
            [
                p_r - W_pr,
                p_theta / r**2 + 1 - W_pth,
                p_theta**2 / r**3 + W_r,
                W_theta + 0 * r,
            ]
        )

    def vector_field(self, s: Union[State, np.ndarray]) -> np.ndarray:
        """
        Hamiltonian vector field at a state, in the chart of the state.
        """
        if isinstance(s, PolarState):
            return self.field_polar(s.as_array())
        if isinstance(s, CartesianState):
            return self.field_xy(s.as_array())
        return self.field_xy(np.asarray(s, dtype=float))

    # Brackets with the radius
    def bracket_r(self, y):
        """{H, r}, the radial velocity."""
        return self.field_polar(y)[0]

    def bracket_hhr(self, y):
        """
        {H, {H, r}} in closed form, p_theta^2/r^3 + dW/dr.

        For the truncated model this holds where chi1 is locally constant, which covers every
        level set H1 = c.
        """
        return self.field_polar(y)[2]

    def to_descriptor(self) -> dict:
        desc = {"hamiltonian": self.kind.value}
        if self.potential is not None:
            desc["potential"] = self.potential.to_descriptor()
        if self.cutoff is not None:
            desc["cutoff"] = {
                "R1": self.cutoff.R1,
                "R2": self.cutoff.R2,
                "c": self.cutoff.c,
                "sup_V": self.cutoff.sup_V,
            }
        return desc


def free_model() -> HamiltonianModel:
    return HamiltonianModel(Kind.FREE)


def full_model(V: PotentialModel) -> HamiltonianModel:
    return HamiltonianModel(Kind.FULL, V)


def build_truncated(V: PotentialModel, c: float, R2: float) -> HamiltonianModel:
    """
    Build H1 = H0 - chi0*chi1*V.

    Args:
        V:  Potential model.
        c:  Energy value, c > 0.
        R2: Truncation radius, R2 > R1.
    Returns:
        The truncated HamiltonianModel.
    """
    if not c > 0:
        raise ValueError(f"Energy value must be positive, got {c}.")
    cutoff = CutoffConfig(V.R1, R2, c, V.sup_V)
    hamiltonians_logger.debug(f"Truncated model with R1={V.R1}, R2={R2:.6g}, c={c}, sup V={V.sup_V:.6g}")
    return HamiltonianModel(Kind.TRUNCATED, V, cutoff)


def perturbation_differential(model: HamiltonianModel, y) -> Tuple[np.ndarray, np.ndarray]:
    """
    The function h = chi0*chi1*V + c and its derivative along the Liouville field p d/dp,

        dh(p d/dp) = chi0 V chi1'(H0 - sup V - c) (p_r^2 + p_theta^2/r^2 + p_theta)

    Args:
        model:  Truncated HamiltonianModel.
        y:      Polar states, components along the first axis.
    Returns:
        (h, dh(p d/dp))
    """
    if model.kind is not Kind.TRUNCATED:
        raise ValueError("The perturbation differential is defined for the truncated model.")
    W, W_pr, W_pth, _, _ = model.perturbation_polar(y)
    return W + model.cutoff.c, y[2] * W_pr + y[3] * W_pth


def support_box(V: PotentialModel, c: float, R2: float) -> Tuple[float, float]:
    """
    Momentum bounds (P, B) of the box {r <= R2, |p_r| <= P, |p_theta| <= B} outside which dh vanishes.
    """
    P = np.sqrt(R2**2 + 2 * (V.sup_V + c + 1))
    return float(P), float(R2 * (R2 + P))


def verify_hset_membership(
    V: PotentialModel, c: float, R2: float, grid: int = 64, fd_points: int = 512
) -> CertificateReport:
    """
    Check on a grid that h = chi0*chi1*V + c lies in the class of compact perturbations:

    - h >= c,
    - h - dh(p d/dp) >= c,
    - dh vanishes outside the support box, and so does dW itself.

    The grid covers (r, p_r, p_theta) over 1.25 times the support box, with the angle drawn from a
    golden ratio sequence. The closed form of dh(p d/dp) is compared with a central difference
    in the momentum scaling on a subset of the grid.
    """
    model = build_truncated(V, c, R2)
    P, B = support_box(V, c, R2)
    r = np.arange(1, grid + 1) * 1.25 * R2 / grid
    p_r = np.linspace(-1.25 * P, 1.25 * P, grid)
    p_theta = np.linspace(-1.25 * B, 1.25 * B, grid)
    Rg, PR, PT = (a.ravel() for a in np.meshgrid(r, p_r, p_theta, indexing="ij"))
    golden = (np.sqrt(5) - 1) / 2
    TH = 2 * np.pi * np.mod(np.arange(Rg.size) * golden, 1.0) - np.pi
    y = np.stack([Rg, TH, PR, PT])

    h, dh = perturbation_differential(model, y)
    lhs = h - dh
    i_worst = int(np.argmin(lhs))
    outside = (Rg > R2) | (np.abs(PR) > P) | (np.abs(PT) > B)
    max_outside = float(np.abs(dh[outside]).max()) if outside.any() else 0.0
    # Whole differential (dW/dp_r, dW/dp_theta, dW/dr, dW/dtheta)
    dW = np.abs(np.stack(model.perturbation_polar(y)[1:]))
    max_dW_outside = float(dW[:, outside].max()) if outside.any() else 0.0

    # Central difference of s -> h(r, theta, s p_r, s p_theta) at s = 1
    idx = np.linspace(0, Rg.size - 1, fd_points).astype(int)
    eps = 1e-6
    y_sub = y[:, idx]
    up = y_sub * np.array([1, 1, 1 + eps, 1 + eps])[:, None]
    down = y_sub * np.array([1, 1, 1 - eps, 1 - eps])[:, None]
    fd = (perturbation_differential(model, up)[0] - perturbation_differential(model, down)[0]) / (2 * eps)
    fd_error = float(np.max(np.abs(fd - dh[idx]) / (1 + np.abs(dh[idx]))))

    report = CertificateReport(
        name="hset",
        min_margin=float(lhs[i_worst]),
        worst_point={n: float(y[k, i_worst]) for k, n in enumerate(("r", "theta", "p_r", "p_theta"))},
        samples=int(Rg.size),
        bounds={
            "h_at_least_c": bool(h.min() >= c),
            "h_minus_dh_at_least_c": bool(lhs.min() >= c),
            "dh_nonpositive": bool(dh.max() <= 0.0),
            "dh_zero_outside_box": max_outside == 0.0,
            "dW_zero_outside_box": max_dW_outside == 0.0,
            "fd_crosscheck": fd_error <= 1e-5,
        },
        details={
            "c": c,
            "R2": R2,
            "sup_V": V.sup_V,
            "box_P": P,
            "box_B": B,
            "min_h": float(h.min()),
            "max_dh": float(dh.max()),
            "max_abs_dh_outside_box": max_outside,
            "max_abs_dW_outside_box": max_dW_outside,
            "fd_max_relative_error": fd_error,
        },
    )
    hamiltonians_logger.info(
        f"Perturbation class check on {Rg.size} grid points: margin {report.min_margin:.6g}, pass {report.passed}"
    )
    return report
