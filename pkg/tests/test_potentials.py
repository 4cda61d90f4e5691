import math

from dataclasses import dataclass

import numpy as np
import pytest

from boostlab.errors import InvalidMassRatio, RadiusTooSmall
from boostlab.models import SLOPE_BOUND, model_from_descriptor, standard_profile
from boostlab.models.Potentials import (
    PotentialModel,
    PowerLawPotential,
    cr3bp_constants,
    cr3bp_potential,
    parse_descriptor,
    powerlaw_potential,
    verify_decay_conditions,
)


@pytest.fixture
def powerlaw():
    return powerlaw_potential(2, 1)


def test_cutoff_profile():
    chi = standard_profile()
    assert chi(-1.0) == 1.0
    assert chi(0.0) == 1.0
    assert chi(0.5) == pytest.approx(0.5)
    assert chi(1.0) == 0.0
    assert chi(3.0) == 0.0
    assert chi.derivative(0.5) == pytest.approx(-2)
    assert chi.derivative(0.0) == 0.0
    slope = chi.min_slope()
    assert SLOPE_BOUND - 1e-9 <= slope < -1.99
    x = np.linspace(-0.5, 1.5, 401)
    assert np.all(np.diff(chi(x)) <= 0)


def test_cutoff_profile_derivative():
    chi = standard_profile()
    x = np.linspace(0.02, 0.98, 97)
    h = 1e-6
    fd = (chi(x + h) - chi(x - h)) / (2 * h)
    assert chi.derivative(x) == pytest.approx(fd, rel=1e-6, abs=1e-8)
    # Flat outside (0, 1)
    assert chi.derivative(np.array([-0.5, 1.0, 2.0])) == pytest.approx([0, 0, 0])


def test_powerlaw_values(powerlaw):
    assert powerlaw.value(2.0) == pytest.approx(1.0)
    assert powerlaw.d_r(2.0) == pytest.approx(-0.5)
    assert powerlaw.d_theta(2.0, 1.0) == 0.0
    # Constant cap inside 0.9*R1
    C = 2 / 0.9
    assert powerlaw.value(0.0) == pytest.approx(C)
    assert powerlaw.value(0.5, 2.0) == pytest.approx(C)
    assert powerlaw.d_r(0.5) == 0.0
    assert powerlaw.sup_V == pytest.approx(C, rel=1e-6)
    assert powerlaw.rotationally_invariant


def test_powerlaw_arrays(powerlaw):
    r = np.linspace(0.0, 5.0, 51)
    V, d_r, d_theta = powerlaw.evaluate(r, 0.3)
    assert V.shape == r.shape
    assert np.all(V > 0)
    assert np.all(d_theta == 0)
    # Smooth blend between the cap and the raw formula
    r_mid = np.linspace(0.91, 0.99, 9)
    h = 1e-6
    fd = (powerlaw.value(r_mid + h) - powerlaw.value(r_mid - h)) / (2 * h)
    assert powerlaw.d_r(r_mid) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_powerlaw_invalid():
    with pytest.raises(ValueError):
        powerlaw_potential(0, 1)
    with pytest.raises(ValueError):
        powerlaw_potential(2, -1)


def test_cr3bp_values():
    V = cr3bp_potential(0.5, 1)
    assert V.a == pytest.approx(2)
    assert V.value(2.0, 0.0) == pytest.approx(0.5333333333333333)
    assert V.value(2.0, math.pi / 2) == pytest.approx(0.485071250072666)
    assert not V.rotationally_invariant


def test_cr3bp_gradient():
    V = cr3bp_potential(0.3, 1.4)
    h = 1e-6
    for q1, q2 in [(2.0, 0.5), (-1.5, 1.0), (0.3, -3.0)]:
        g1, g2 = V.gradient_xy(q1, q2)
        fd1 = (V.value_xy(q1 + h, q2) - V.value_xy(q1 - h, q2)) / (2 * h)
        fd2 = (V.value_xy(q1, q2 + h) - V.value_xy(q1, q2 - h)) / (2 * h)
        assert g1 == pytest.approx(fd1, abs=1e-7)
        assert g2 == pytest.approx(fd2, abs=1e-7)


def test_cr3bp_invalid():
    with pytest.raises(InvalidMassRatio):
        cr3bp_potential(0.7, 2)
    with pytest.raises(InvalidMassRatio):
        cr3bp_potential(0.0, 2)
    with pytest.raises(RadiusTooSmall):
        cr3bp_potential(0.5, 0.5)
    # Also a ValueError
    with pytest.raises(ValueError):
        cr3bp_potential(0.5, 0.5)


def test_cr3bp_constants():
    p = cr3bp_constants(0.5, (0, 0), (0.5, 0))
    assert (p.R1, p.a) == pytest.approx((1, 2))
    p = cr3bp_constants(0.3, (0, 0), (0, 0))
    assert p.R1 == pytest.approx(1.4)
    assert p.a == pytest.approx(0.98 / 1.1 + 0.42 / 0.7)
    p = cr3bp_constants(0.5, (3, 0), (0, 0))
    assert (p.R1, p.a) == pytest.approx((3, 1.2))


def test_decay_conditions_powerlaw(powerlaw):
    report = verify_decay_conditions(powerlaw, r_max=100)
    assert report.passed
    assert report.details["bound_margin"] >= 0
    assert report.details["slope_margin"] >= 0


@pytest.mark.parametrize("mu", [0.1, 0.3, 0.5])
def test_decay_conditions_cr3bp(mu):
    V = cr3bp_potential(mu, max(2 * (1 - mu), 1.0))
    report = verify_decay_conditions(V, r_max=100 * V.R1)
    assert report.passed
    assert report.min_margin >= -1e-12


def test_decay_conditions_violated():
    V = PowerLawPotential(2, 1, coefficient=4)
    report = verify_decay_conditions(V, r_max=100)
    assert not report.passed
    assert report.details["bound_margin"] < 0


@dataclass(frozen=True)
class CubicPotential(PotentialModel):
    a: float
    R1: float

    kind = "cubic"

    def _raw(self, r, theta):
        return 1 / r**3, -3 / r**4, np.zeros_like(r)

    @property
    def cap_constant(self) -> float:
        return 1 / self.cap_start**3

    def to_descriptor(self):
        return {"kind": self.kind, "a": self.a, "R1": self.R1}


def test_decay_conditions_r2v_bound(powerlaw):
    assert verify_decay_conditions(powerlaw, r_max=100).bounds["r2V_nondecreasing"]
    V = cr3bp_potential(0.3, 1.4)
    assert verify_decay_conditions(V, r_max=100 * V.R1).bounds["r2V_nondecreasing"]
    # r^2 V = 1/r falls off, so the monotonicity bound fails with the slope margin
    report = verify_decay_conditions(CubicPotential(2, 1), r_max=10)
    assert not report.bounds["r2V_nondecreasing"]
    assert report.details["max_decrease_r2V"] > 0
    assert not report.passed


def test_parse_descriptor():
    assert parse_descriptor("powerlaw:a=2,R1=1") == {"kind": "powerlaw", "a": 2.0, "R1": 1.0}
    assert parse_descriptor("CR3BP: mu = 0.5") == {"kind": "cr3bp", "mu": 0.5}
    assert parse_descriptor("free") == {"kind": "free"}
    with pytest.raises(ValueError):
        parse_descriptor("powerlaw:a")
    with pytest.raises(ValueError):
        parse_descriptor("powerlaw:a=two")


def test_model_from_descriptor(powerlaw):
    assert model_from_descriptor("powerlaw:a=2,R1=1") == powerlaw
    assert model_from_descriptor(powerlaw.to_descriptor()) == powerlaw
    assert model_from_descriptor("free") is None
    assert model_from_descriptor(None) is None
    V = model_from_descriptor("cr3bp:mu=0.5", q0=(0, 0.3), q1=(0.3, 0))
    assert (V.R1, V.a) == pytest.approx((1, 2))
    assert model_from_descriptor(V.to_descriptor()) == V
    with pytest.raises(ValueError):
        model_from_descriptor("powerlaw:a=2")
    with pytest.raises(ValueError):
        model_from_descriptor("kepler:a=1,R1=1")
