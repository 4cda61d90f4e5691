import numpy as np
import pytest

from boostlab.errors import BadRadii
from boostlab.models.Hamiltonians import (
    Kind,
    build_truncated,
    free_model,
    full_model,
    perturbation_differential,
    support_box,
    verify_hset_membership,
)
from boostlab.models.Potentials import cr3bp_potential, powerlaw_potential
from boostlab.phase_space import (
    CartesianState,
    PolarState,
    cartesian_to_polar_array,
    gradient_fd,
    poisson_bracket_fd,
    radius,
)


@pytest.fixture
def V():
    return powerlaw_potential(2, 1)


def test_energy_values(V):
    H0 = free_model()
    assert H0.evaluate(CartesianState(0, 0, 1, 0)) == 0.5
    assert H0.evaluate(CartesianState(1, 0, 0, 1)) == -0.5
    assert H0.evaluate(PolarState(1, 0, 0, -1)) == pytest.approx(-0.5)
    H = full_model(V)
    assert H.evaluate(PolarState(2, 0, 0, 0)) == pytest.approx(-1)
    assert H.kind is Kind.FULL


def test_free_vector_field():
    field = free_model().vector_field(CartesianState(1, 0, 0, 1))
    assert field == pytest.approx([0, 0, 1, 0])


def test_truncated_vector_field():
    # chi0 = chi1 = 1 at r = R1 = 2 and H0 = 6 < sup V + c
    V = powerlaw_potential(2, 2)
    model = build_truncated(V, 10.0, 5.0)
    field = model.vector_field(PolarState(2, 0, 0, 4))
    assert field == pytest.approx([0, 2, 1.5, 0])


@pytest.mark.parametrize(
    "model",
    [
        free_model(),
        full_model(powerlaw_potential(2, 1)),
        full_model(cr3bp_potential(0.5, 1)),
        build_truncated(powerlaw_potential(2, 1), 3.0, 7.4),
    ],
    ids=["free", "powerlaw", "cr3bp", "truncated"],
)
def test_vector_field_is_hamiltonian(model):
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = np.concatenate([rng.uniform(-4, 4, 2), rng.uniform(-3, 3, 2)])
        grad = gradient_fd(model.energy_xy, x, 1e-6)
        expected = np.array([grad[2], grad[3], -grad[0], -grad[1]])
        assert model.field_xy(x) == pytest.approx(expected, abs=1e-6)
        # Same field in the polar chart
        y = cartesian_to_polar_array(x)
        assert model.energy_polar(y) == pytest.approx(model.energy_xy(x), abs=1e-12)


@pytest.mark.parametrize(
    "model",
    [full_model(powerlaw_potential(2, 1)), full_model(cr3bp_potential(0.5, 1))],
    ids=["powerlaw", "cr3bp"],
)
def test_brackets_closed_form(model):
    rng = np.random.default_rng(0)
    r = rng.uniform(1, 10, 1000)
    theta = rng.uniform(-np.pi, np.pi, 1000)
    p_r = rng.uniform(-3, 3, 1000)
    p_theta = rng.uniform(-5, 5, 1000)
    y = np.stack([r, theta, p_r, p_theta])
    assert model.bracket_r(y) == pytest.approx(p_r)

    def dr(x):
        return model.bracket_r(cartesian_to_polar_array(x))

    for k in range(0, 1000, 10):
        s = PolarState.from_array(y[:, k])
        assert poisson_bracket_fd(model.energy_xy, radius, s, 1e-6) == pytest.approx(p_r[k], rel=1e-6, abs=1e-7)
        value = poisson_bracket_fd(model.energy_xy, dr, s, 1e-6)
        assert value == pytest.approx(model.bracket_hhr(y[:, k]), rel=1e-6, abs=1e-7)


def test_truncated_matches_full_inside(V):
    model = build_truncated(V, 3.0, 7.4)
    full = full_model(V)
    # Inside B(R1) on the level set chi0 = chi1 = 1
    y = np.array([0.8, 0.4, 0.5, 0.3])
    assert model.energy_polar(y) == pytest.approx(full.energy_polar(y))
    # Far outside B(R2) the perturbation vanishes
    y = np.array([20.0, 0.4, 0.5, 0.3])
    assert model.energy_polar(y) == pytest.approx(free_model().energy_polar(y))


def test_bad_radii(V):
    with pytest.raises(BadRadii):
        build_truncated(V, 3.0, 1.0)
    with pytest.raises(ValueError):
        build_truncated(V, -1.0, 7.4)


def test_perturbation_differential(V):
    model = build_truncated(V, 3.0, 7.4)
    # chi0 = 0 far out: h = c and dh = 0 exactly
    y = np.array([[14.8], [0.0], [1.0], [2.0]])
    h, dh = perturbation_differential(model, y)
    assert h[0] == 3.0
    assert dh[0] == 0.0
    with pytest.raises(ValueError):
        perturbation_differential(full_model(V), y)


def test_support_box(V):
    P, B = support_box(V, 3.0, 7.4)
    assert P == pytest.approx(np.sqrt(7.4**2 + 2 * (V.sup_V + 4)))
    assert B == pytest.approx(7.4 * (7.4 + P))


def test_hset_membership(V):
    report = verify_hset_membership(V, 3.0, 7.4, grid=64)
    assert report.passed
    assert report.samples == 64**3
    assert report.bounds["dh_zero_outside_box"]
    assert report.bounds["dW_zero_outside_box"]
    assert report.details["max_abs_dW_outside_box"] == 0.0
    assert report.bounds["h_at_least_c"]
    assert report.min_margin >= 3.0
