import math

import numpy as np
import pytest

from dataclasses import replace
from scipy.integrate import trapezoid

from boostlab.chords import Chord, ShootingProblem, fiber_circle
from boostlab.chords.Action import action_terms, check_confinement, rabinowitz_action
from boostlab.chords.Shooting import CHORD_TOL, build_chord, find_chords, shoot
from boostlab.dynamics import free_flow_exact
from boostlab.errors import EmptyFiber, OutOfRange
from boostlab.models.Hamiltonians import free_model, full_model
from boostlab.models.Potentials import cr3bp_potential, powerlaw_potential
from boostlab.phase_space import CartesianState


def _constant_chord(model, x0, eta, n=101):
    times = np.linspace(0, 1, n)
    samples = np.tile(x0, (n, 1))
    return Chord(
        q0=(x0[0], x0[1]),
        q1=(x0[0], x0[1]),
        c=float(model.energy_xy(x0)),
        eta=eta,
        psi=0.0,
        times=times,
        samples=samples,
        residual=0.0,
        max_radius=math.hypot(x0[0], x0[1]),
        energy_deviation=0.0,
    )


def test_fiber_circle():
    model = free_model()
    fiber = fiber_circle(model, (1, 0), 3)
    assert fiber.center == (0, 1)
    assert fiber.radius == pytest.approx(math.sqrt(7))
    assert model.energy_xy(fiber.state(0.0)) == pytest.approx(3)
    assert model.energy_xy(fiber.state(2.1)) == pytest.approx(3)

    V = powerlaw_potential(2, 1)
    fiber = fiber_circle(full_model(V), (0, 0), 3)
    assert fiber.center == (0, 0)
    assert fiber.radius == pytest.approx(math.sqrt(2 * (3 + V.value(0.0))))


def test_fiber_circle_degenerate(caplog):
    with pytest.raises(EmptyFiber):
        fiber_circle(full_model(powerlaw_potential(2, 1)), (0, 0), -10)
    fiber = fiber_circle(free_model(), (0, 0), 0)
    assert fiber.radius == 0
    assert "single point" in caplog.text


def test_shoot_against_free_flow():
    problem = ShootingProblem(free_model(), (1, 0), (0.2, -0.4), 3.0, psi_grid_size=4, max_eta=5)
    for psi, T in [(0.3, 1.2), (2.0, 0.4), (5.5, 3.1)]:
        p0 = problem.fiber.momentum(psi)
        exact = free_flow_exact(CartesianState(1, 0, p0[0], p0[1]), T)
        residual = shoot(problem, psi, T)
        assert residual == pytest.approx(exact.position - np.array([0.2, -0.4]), abs=1e-9)
    with pytest.raises(OutOfRange):
        shoot(problem, 0.3, 6.0)
    with pytest.raises(OutOfRange):
        shoot(problem, 0.3, 0.0)


def test_shoot_short_chord():
    problem = ShootingProblem(free_model(), (1, 0), (1, 0), 3.0, psi_grid_size=4)
    assert np.linalg.norm(shoot(problem, 1.0, 1e-9)) < 1e-8


def test_problem_validation():
    with pytest.raises(ValueError):
        ShootingProblem(free_model(), (1, 0), (0, 1), 3.0, min_eta=2, max_eta=1)
    with pytest.raises(ValueError):
        ShootingProblem(free_model(), (1, 0), (0, 1), 3.0, positive="sign")
    problem = ShootingProblem(full_model(powerlaw_potential(2, 1)), (0.5, 0), (3, 4), 7.1)
    assert problem.escape_radius == pytest.approx(100)


def test_action():
    model = free_model()
    chord = _constant_chord(model, np.array([1.0, 0.0, 0.5, 2.0]), 1e-9)
    assert abs(rabinowitz_action(chord, model)) < 1e-6
    lam, energy = action_terms(chord, model)
    assert energy == pytest.approx(0)


def test_check_confinement():
    model = free_model()
    assert check_confinement(_constant_chord(model, np.array([1.0, 0.0, 0.0, 1.0]), 1.0), 1.0)
    assert not check_confinement(_constant_chord(model, np.array([2.0, 0.0, 0.0, 1.0]), 1.0), 1.0)


def test_find_chords_powerlaw():
    V = powerlaw_potential(2, 1)
    problem = ShootingProblem(full_model(V), (0.5, 0), (-0.5, 0), 7.1, psi_grid_size=32, max_eta=5.0)
    chords = find_chords(problem)
    assert len(chords) >= 1
    for chord in chords:
        assert chord.residual < 1e-8
        assert chord.energy_deviation < 1e-8
        assert chord.eta >= problem.min_eta
    # c above the energy condition and both endpoints in B(R1): every chord stays in B(R1)
    assert all(chord.max_radius <= V.R1 + 1e-6 for chord in chords)
    actions = [chord.action for chord in chords]
    assert actions == sorted(actions, reverse=True)
    data = chords[0].to_json()
    assert len(data["samples"]) == problem.chord_samples
    assert "samples" not in chords[0].to_json(include_samples=False)


def test_find_chords_cr3bp():
    V = cr3bp_potential(0.5, 1)
    problem = ShootingProblem(full_model(V), (0, 0.3), (0.3, 0), 7.1, psi_grid_size=32, max_eta=5.0)
    chords = find_chords(problem)
    assert len(chords) >= 1
    assert all(chord.residual < 1e-8 for chord in chords)
    assert all(chord.max_radius <= V.R1 + 1e-6 for chord in chords)


def test_find_chords_positive_action():
    V = powerlaw_potential(2, 1)
    problem = ShootingProblem(
        full_model(V), (0.5, 0), (-0.5, 0), 7.1, psi_grid_size=32, max_eta=5.0, positive="both"
    )
    assert all(chord.positive_action for chord in find_chords(problem))


def test_find_chords_same_fiber():
    problem = ShootingProblem(free_model(), (1, 0), (1, 0), 3.0, psi_grid_size=8, max_eta=4.0)
    for chord in find_chords(problem):
        assert chord.eta >= problem.min_eta


def test_find_chords_loose_tolerances():
    V = powerlaw_potential(2, 1)
    problem = ShootingProblem(
        full_model(V),
        (0.5, 0),
        (-0.5, 0),
        7.1,
        psi_grid_size=16,
        max_eta=2.0,
        method="RK45",
        rel_tol=1e-5,
        abs_tol=1e-5,
    )
    for chord in find_chords(problem):
        assert chord.residual < CHORD_TOL
        assert chord.energy_deviation < CHORD_TOL


def test_find_chords_grid_refinement():
    model = full_model(powerlaw_potential(2, 1))
    coarse = find_chords(ShootingProblem(model, (0.5, 0), (-0.5, 0), 7.1, psi_grid_size=32, max_eta=5.0))
    fine = find_chords(ShootingProblem(model, (0.5, 0), (-0.5, 0), 7.1, psi_grid_size=64, max_eta=5.0))
    assert len(fine) == len(coarse)
    assert sorted(ch.eta for ch in fine) == pytest.approx(sorted(ch.eta for ch in coarse), rel=1e-6)


def test_action_quadrature_refinement():
    model = full_model(powerlaw_potential(2, 1))
    problem = ShootingProblem(model, (0.5, 0), (-0.5, 0), 7.1, psi_grid_size=32, max_eta=5.0)
    chord = find_chords(problem)[0]
    coarse = build_chord(replace(problem, chord_samples=201), chord.psi, chord.eta)
    fine = build_chord(replace(problem, chord_samples=401), chord.psi, chord.eta)
    # Simpson's rule is fourth order
    extrapolated = fine.action + (fine.action - coarse.action) / 15
    assert chord.action == pytest.approx(extrapolated, rel=1e-6, abs=1e-6)
    # On shell the action is eta times the mean of p.qdot
    x = chord.samples.T
    qdot = model.field_xy(x)[:2]
    mean_pqdot = trapezoid(x[2] * qdot[0] + x[3] * qdot[1], x=chord.times)
    assert chord.action == pytest.approx(chord.eta * mean_pqdot, rel=1e-5, abs=1e-6)
