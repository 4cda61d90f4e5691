import numpy as np
import pytest

import boostlab
from boostlab.certify import (
    BatchResult,
    CertificateReport,
    energy_gap_bound,
    run_batches,
    thresholds,
    truncation_radius,
)
from boostlab.certify.LevelSets import p_theta_interval, sample_level_set, sample_turning_points
from boostlab.certify.Lemmas import (
    CHECKS,
    verify_all,
    verify_energy_gap,
    verify_far_field_return,
    verify_no_max_annulus,
    verify_no_return_full,
    verify_no_return_truncated,
    verify_rotational_confinement,
)
from boostlab.errors import BadRadii, EnergyBelowThreshold, OutOfRange
from boostlab.models.Hamiltonians import full_model
from boostlab.models.Potentials import cr3bp_potential, powerlaw_potential
from boostlab.output import dumps_json


@pytest.fixture
def V():
    return powerlaw_potential(2, 1)


def test_thresholds():
    ts = thresholds(2, 1)
    assert ts.cond_c == pytest.approx(7.02840, abs=1e-4)
    assert ts.rot_threshold == 2
    assert ts.rot_threshold_prop == 2
    assert ts.c is None and ts.branch is None
    ts = thresholds(2, 1, 3)
    assert ts.e_rot == 0.625
    assert ts.R2_rot == pytest.approx(7.4)
    assert ts.R2_noMax == 0.8125
    assert ts.branch == "rotational"
    assert thresholds(2, 1, 7.1).branch == "general"
    assert thresholds(2, 1, 1.5).branch is None
    # R1 > 1 makes the second rotational threshold the stricter one
    assert thresholds(1, 4).rot_energy_floor == pytest.approx(np.sqrt(32))
    with pytest.raises(ValueError):
        thresholds(-2, 1)


def test_energy_gap_bound():
    assert energy_gap_bound(3, 2, 1) == 0.625
    assert energy_gap_bound(7.0284, 2, 1) == pytest.approx(2.8272, abs=1e-4)
    assert 0 < energy_gap_bound(3, 2, 2.25 - 1e-9) < 1e-8
    with pytest.raises(OutOfRange):
        energy_gap_bound(3, 2, 2.25)
    assert energy_gap_bound(3, 2, 1, R1=1) == 0.625
    with pytest.raises(OutOfRange):
        energy_gap_bound(3, 2, 0.5, R1=1)


def test_truncation_radius(V):
    assert truncation_radius(V, 7.1) == pytest.approx((7.1**2 + 4) / 16)
    assert truncation_radius(V, 3) == pytest.approx(7.4)
    with pytest.raises(EnergyBelowThreshold):
        truncation_radius(V, 1.5)
    # The rotational branch needs a rotationally invariant potential
    with pytest.raises(EnergyBelowThreshold):
        truncation_radius(cr3bp_potential(0.5, 1), 3)


def test_report_pass_rule():
    report = CertificateReport("test", 0.5, None, 10)
    assert report.passed
    assert not CertificateReport("test", 0.0, None, 10).passed
    assert not CertificateReport("test", 0.5, None, 10, bounds={"lower": False}).passed
    data = report.to_json()
    assert set(data) == {"check", "pass", "margin", "worst_point", "samples", "tolerance", "bounds", "details"}


def test_run_batches_deterministic(monkeypatch):
    def kernel(rng, n):
        x = rng.uniform(size=n)
        i = int(np.argmin(x))
        return BatchResult(float(x[i]), {"x": float(x[i])}, n, {"max_neg": float(-x.max())})

    first = run_batches(kernel, 20000, seed=3, batch_size=1000)
    monkeypatch.setenv(boostlab.THREADS_ENV, "1")
    second = run_batches(kernel, 20000, seed=3, batch_size=1000)
    assert first == second
    assert first.count == 20000
    assert run_batches(kernel, 20000, seed=4, batch_size=1000).margin != first.margin
    # Uneven last batch
    assert run_batches(kernel, 2500, seed=3, batch_size=1000).count == 2500


def test_level_set_samplers(V):
    model = full_model(V)
    rng = np.random.default_rng(0)
    y = sample_level_set(model, 3.0, 1.0, 2.0, rng, 1000)
    assert y.shape[0] == 4
    assert np.all((y[0] >= 1.0) & (y[0] <= 2.0))
    assert model.energy_polar(y) == pytest.approx(np.full(y.shape[1], 3.0), abs=1e-9)
    y, E = sample_turning_points(model, 3.0, 1.0, 2.0, rng, 500)
    assert y.shape[1] == 1000
    assert np.all(y[2] == 0)
    assert model.energy_polar(y) == pytest.approx(E, abs=1e-9)
    lo, hi, ok = p_theta_interval(np.array([1.0]), np.array([-1.0]))
    assert not ok[0]


def test_energy_gap(V):
    report = verify_energy_gap(full_model(V), 3.0, 1.0, 2.0, samples=100_000, seed=0)
    assert report.passed
    assert report.min_margin > 0
    assert report.samples == 100_000
    with pytest.raises(OutOfRange):
        verify_energy_gap(full_model(V), 3.0, 1.0, 9 / 4 + 1, samples=100)
    with pytest.raises(EnergyBelowThreshold):
        verify_energy_gap(full_model(V), 1.5, 1.0, 1.1, samples=100)
    # Above sqrt(2 a R1) = 2 but below sqrt(2 a R1^2) = 2.83
    with pytest.raises(EnergyBelowThreshold):
        verify_energy_gap(full_model(powerlaw_potential(1, 2)), 2.5, 2.0, 3.0, samples=100)


@pytest.mark.parametrize("c", [3.0, 7.1])
def test_no_return_full(V, c):
    report = verify_no_return_full(full_model(V), c, samples=100_000, seed=0)
    assert report.passed
    assert report.min_margin > 0
    assert report.bounds["proof_lower_bound"]


def test_no_return_truncated(V):
    report = verify_no_return_truncated(V, 3.0, 0.625, samples=100_000, seed=0)
    assert report.passed
    assert report.details["R2"] == pytest.approx(7.4)
    assert report.bounds["chain_lower_bound"]
    assert report.bounds["chi0_term_bound"]
    e_lo, e_hi = report.details["energy_range"]
    assert e_lo == pytest.approx(-0.5 * (1.5 * 7.4) ** 2)
    assert e_hi == 3.0
    with pytest.raises(BadRadii):
        verify_no_return_truncated(V, 3.0, 1e300, samples=100)


def test_no_max_annulus(V):
    report = verify_no_max_annulus(V, 7.1, samples=100_000, seed=0)
    assert report.passed
    assert report.details["R2"] == pytest.approx(3.400625)
    with pytest.raises(EnergyBelowThreshold):
        verify_no_max_annulus(V, 2.0)


def test_far_field(V):
    report = verify_far_field_return(V, 7.1, samples=20_000, seed=0)
    assert report.passed
    with pytest.raises(EnergyBelowThreshold):
        verify_far_field_return(V, 3.0)


def test_rotational_confinement(V):
    report = verify_rotational_confinement(full_model(V), 3.0, samples=8, seed=0, T=3.0)
    assert report.passed
    assert report.bounds["p_theta_conserved"]
    assert report.bounds["radius_nondecreasing"]
    with pytest.raises(ValueError):
        verify_rotational_confinement(full_model(cr3bp_potential(0.5, 1)), 3.0)


def test_verify_all_deterministic(V):
    checks = ("gap", "no-return", "no-max")
    first = verify_all(V, 7.1, checks, samples=20_000, seed=0)
    second = verify_all(V, 7.1, checks, samples=20_000, seed=0)
    assert [r.name for r in first] == list(checks)
    assert all(r.passed for r in first)
    assert dumps_json([r.to_json() for r in first]) == dumps_json([r.to_json() for r in second])
    with pytest.raises(ValueError):
        verify_all(V, 7.1, ("bogus",))


def test_verify_all_checks(V):
    reports = verify_all(V, 7.1, CHECKS, samples=20_000, seed=0, grid=32)
    assert [r.name for r in reports] == list(CHECKS)
    assert all(r.passed for r in reports)
