"""
Sampled verification of the confinement lemmas.

Each verifier draws seeded batches of points from the relevant constraint set, evaluates the
closed form brackets and reports the smallest margin together with the analytic lower bounds
used in the proofs.
"""

import numpy as np

from typing import Dict, List, Optional, Sequence

from . import (
    BatchResult,
    CertificateReport,
    certify_logger,
    point_dict,
    run_batches,
    thresholds,
    truncation_radius,
)
from .LevelSets import sample_level_set, sample_turning_points
from ..dynamics import IntegratorConfig
from ..dynamics.Propagator import flow
from ..errors import EmptySample, EnergyBelowThreshold, OutOfRange
from ..models.Hamiltonians import Kind, build_truncated, full_model, verify_hset_membership
from ..models.Potentials import PotentialModel, verify_decay_conditions
from ..phase_space import cartesian_to_polar_array, polar_to_cartesian_array

# Slack for pointwise comparison with the analytic lower bounds
BOUND_SLACK = 1e-9

# Checks run by "all"
CHECKS = ("decay", "hset", "gap", "no-return", "no-return-truncated", "no-max")
EXTRA_CHECKS = ("far-field", "rotational")


def _reduce(y: np.ndarray, margin: np.ndarray, minima: Dict[str, np.ndarray]) -> BatchResult:
    if margin.size == 0:
        return BatchResult()
    i = int(np.argmin(margin))
    return BatchResult(
        margin=float(margin[i]),
        worst_point=point_dict(y, i),
        count=int(margin.size),
        minima={k: float(np.min(v)) for k, v in minima.items()},
    )


def _report(name: str, res: BatchResult, bounds: Dict[str, bool], details: Dict) -> CertificateReport:
    if res.count == 0:
        raise EmptySample(f"No admissible points found for {name}.")
    report = CertificateReport(
        name=name,
        min_margin=res.margin,
        worst_point=res.worst_point,
        samples=res.count,
        bounds=bounds,
        details={**details, "minima": res.minima},
    )
    certify_logger.info(f"{name}: {res.count} samples, min margin {res.margin:.6g}, pass {report.passed}")
    return report


def gap_bound_array(c: float, a: float, r: np.ndarray) -> np.ndarray:
    return (c**2 - 2 * a * r) / (2 * (c + r**2))


def verify_energy_gap(
    model, c: float, r_lo: float, r_hi: float, samples: int = 100_000, seed: int = 0
) -> CertificateReport:
    """
    Check c - p_theta > (c^2 - 2ar)/(2(c + r^2)) on H^-1(c) for r in [r_lo, r_hi].

    Also checks that the bound is strictly decreasing in r on that range.

    Args:
        model:      Full HamiltonianModel.
        c:          Energy value, above both rotational thresholds.
        r_lo, r_hi: Radial range, R1 <= r_lo < r_hi < c^2/(2a).
        samples:    Number of level set samples.
        seed:       Seed of the sampler.
    Returns:
        CertificateReport
    """
    V = model.potential
    a, R1 = V.a, V.R1
    ts = thresholds(a, R1, c)
    if c <= ts.rot_energy_floor:
        raise EnergyBelowThreshold(
            f"c = {c} must exceed max(sqrt(2 a R1), sqrt(2 a R1^2)) = {ts.rot_energy_floor:.6g}."
        )
    if r_lo < R1 or r_hi >= c**2 / (2 * a) or r_hi <= r_lo:
        raise OutOfRange(f"Radial range [{r_lo}, {r_hi}] must satisfy R1 <= r_lo < r_hi < c^2/(2a).")

    def kernel(rng, n):
        y = sample_level_set(model, c, r_lo, r_hi, rng, n)
        margin = (c - y[3]) - gap_bound_array(c, a, y[0])
        return _reduce(y, margin, {})

    res = run_batches(kernel, samples, seed)
    r = np.linspace(r_lo, r_hi, 1001)
    decreasing = bool(np.all(np.diff(gap_bound_array(c, a, r)) < 0))
    return _report(
        "gap",
        res,
        {"bound_decreasing": decreasing},
        {"c": c, "r_lo": r_lo, "r_hi": r_hi, "seed": seed},
    )


def verify_no_return_full(
    model, c: float, samples: int = 100_000, seed: int = 0, r_max: Optional[float] = None
) -> CertificateReport:
    """
    No interior maximum of r outside B(R1) for the full model.

    Samples turning points p_r = 0 of H^-1(c) with r >= R1 and c - p_theta > 0 and checks
    {H, {H, r}} = p_theta^2/r^3 + dV/dr > 0, together with the lower bound (2/r)(c - p_theta).
    """
    V = model.potential
    r_max = r_max or max(10 * V.R1, c**2 / (2 * V.a))

    def kernel(rng, n):
        y, _ = sample_turning_points(model, c, V.R1, r_max, rng, n)
        y = y[:, c - y[3] > 0]
        bracket = model.bracket_hhr(y)
        lower = 2 / y[0] * (c - y[3])
        return _reduce(y, bracket, {"lower_bound_gap": (bracket - lower) / (1 + np.abs(bracket))})

    res = run_batches(kernel, samples, seed)
    return _report(
        "no-return",
        res,
        {"proof_lower_bound": res.minima.get("lower_bound_gap", -np.inf) >= -BOUND_SLACK},
        {"c": c, "r_max": r_max, "seed": seed},
    )


def verify_no_return_truncated(
    V: PotentialModel, c: float, e: float, samples: int = 100_000, seed: int = 0, r_max: Optional[float] = None
) -> CertificateReport:
    """
    No interior maximum of r outside B(R1) for H1 with R2 = R1 + 2a/e on {H1 - p_theta >= e}.

    Half of the energies are drawn from [0, c] and half from [-r_max^2/2, 0), down to the lowest
    turning point energy of H0. The bracket must satisfy
    {H1, {H1, r}} = p_theta^2/r^3 + chi0 dV/dr + chi0' V >= e/r, and pointwise chi0' V >= -2a/((R2 - R1) r).
    """
    if not e > 0:
        raise ValueError(f"The constant e must be positive, got {e}.")
    R2 = V.R1 + 2 * V.a / e
    model = build_truncated(V, c, R2)
    r_max = r_max or 1.5 * R2
    cut = model.cutoff
    e_lo = -0.5 * r_max**2

    def kernel(rng, n):
        energy = np.where(rng.random(n) < 0.5, rng.uniform(0.0, c, n), rng.uniform(e_lo, 0.0, n))
        y, E = sample_turning_points(model, energy, V.R1, r_max, rng, n)
        keep = E - y[3] >= e
        y = y[:, keep]
        bracket = model.bracket_hhr(y)
        chi_term = cut.dchi0(y[0]) * V.value(y[0], y[1]) + 2 * V.a / ((R2 - V.R1) * y[0])
        return _reduce(
            y,
            bracket,
            {
                "chain_gap": (bracket - e / y[0]) / (1 + np.abs(bracket)),
                "chi0_term_gap": chi_term,
            },
        )

    res = run_batches(kernel, samples, seed)
    return _report(
        "no-return-truncated",
        res,
        {
            "chain_lower_bound": res.minima.get("chain_gap", -np.inf) >= -BOUND_SLACK,
            "chi0_term_bound": res.minima.get("chi0_term_gap", -np.inf) >= -BOUND_SLACK,
        },
        {"c": c, "e": e, "R2": R2, "r_max": r_max, "energy_range": [e_lo, c], "seed": seed},
    )


def verify_no_max_annulus(V: PotentialModel, c: float, samples: int = 100_000, seed: int = 0) -> CertificateReport:
    """
    No interior maximum of r on the annulus B(R2) minus B(R1) for H1 with R2 = (c^2 + 2aR1)/(8a).

    Checks {H1, {H1, r}} >= aR1^2/(4r(c + R2^2)(R2 - R1)) at turning points of H1^-1(c).
    """
    a, R1 = V.a, V.R1
    ts = thresholds(a, R1, c)
    if c <= ts.cond_c:
        raise EnergyBelowThreshold(f"c = {c} must exceed the energy condition {ts.cond_c:.6g}.")
    R2 = ts.R2_noMax
    model = build_truncated(V, c, R2)

    def kernel(rng, n):
        y, _ = sample_turning_points(model, c, R1, R2, rng, n)
        bracket = model.bracket_hhr(y)
        lower = a * R1**2 / (4 * y[0] * (c + R2**2) * (R2 - R1))
        return _reduce(y, bracket, {"lower_bound_gap": bracket - lower})

    res = run_batches(kernel, samples, seed)
    return _report(
        "no-max",
        res,
        {
            "proof_lower_bound": res.minima.get("lower_bound_gap", -np.inf) >= -1e-12,
            "R2_at_least_7/4_R1": R2 >= 1.75 * R1,
            "R2_below_c^2/(2a)": R2 < c**2 / (2 * a),
        },
        {"c": c, "R2": R2, "cond_c": ts.cond_c, "seed": seed},
    )


def verify_far_field_return(
    V: PotentialModel, c: float, samples: int = 100_000, seed: int = 0, r_max: Optional[float] = None
) -> CertificateReport:
    """
    Outside B(R2), R2 = (c^2 + 2aR1)/(8a), H1 is free and turning points with
    c - p_theta >= (c^2 - 2aR2)/(2(c + R2^2)) have {H1, {H1, r}} = p_theta^2/r^3 > 0.
    Also checks (c^2 - 2aR2)/(2(c + R2^2)) >= 17c^2/(48(c + R2^2)).
    """
    a = V.a
    ts = thresholds(a, V.R1, c)
    if c <= ts.cond_c:
        raise EnergyBelowThreshold(f"c = {c} must exceed the energy condition {ts.cond_c:.6g}.")
    R2 = ts.R2_noMax
    model = build_truncated(V, c, R2)
    gap = (c**2 - 2 * a * R2) / (2 * (c + R2**2))
    r_max = r_max or 10 * R2

    def kernel(rng, n):
        y, _ = sample_turning_points(model, c, R2, r_max, rng, n)
        y = y[:, c - y[3] >= gap]
        return _reduce(y, model.bracket_hhr(y), {})

    res = run_batches(kernel, samples, seed)
    return _report(
        "far-field",
        res,
        {"gap_at_least_17c^2/48": gap >= 17 * c**2 / (48 * (c + R2**2))},
        {"c": c, "R2": R2, "gap": gap, "r_max": r_max, "seed": seed},
    )


def verify_rotational_confinement(
    model,
    c: float,
    samples: int = 64,
    seed: int = 0,
    T: float = 5.0,
    cfg: Optional[IntegratorConfig] = None,
) -> CertificateReport:
    """
    Flow states of H^-1(c) leaving B(R1) and check that r never turns back.

    The margin is the smallest {H, {H, r}} met along the flows. Outside B(R1) the angular momentum
    must stay constant and r(t) nondecreasing.

    Args:
        model:      Full HamiltonianModel with a rotationally invariant potential.
        c:          Energy value above the rotational floor.
        samples:    Number of flowed states.
        seed:       Seed of the sampler.
        T:          Duration of each flow.
        cfg:        IntegratorConfig, defaults to DOP853 at tolerance 1e-10.
    Returns:
        CertificateReport
    """
    if model.kind is not Kind.FULL or not model.rotationally_invariant:
        raise ValueError("Rotational confinement needs a full model with rotationally invariant potential.")
    V = model.potential
    ts = thresholds(V.a, V.R1, c)
    if c <= ts.rot_energy_floor:
        raise EnergyBelowThreshold(f"c = {c} must exceed the rotational floor {ts.rot_energy_floor:.6g}.")
    cfg = cfg or IntegratorConfig(method="DOP853", abs_tol=1e-10, rel_tol=1e-10)

    def kernel(rng, n):
        y0 = sample_level_set(model, c, V.R1, V.R1, rng, n)
        y0[2] = np.abs(y0[2])
        x0 = polar_to_cartesian_array(y0)
        result = BatchResult()
        for k in range(x0.shape[1]):
            traj = flow(model, x0[:, k], T, cfg, n_samples=201)
            y = cartesian_to_polar_array(traj.samples.T)
            outside = y[0] >= V.R1 * (1 - 1e-12)
            result.merge(
                _reduce(
                    y[:, outside],
                    model.bracket_hhr(y[:, outside]),
                    {
                        "p_theta_conservation": -np.abs(y[3, outside] - y0[3, k]),
                        "radius_increments": np.diff(y[0]),
                    },
                )
            )
        return result

    res = run_batches(kernel, samples, seed, batch_size=16)
    return _report(
        "rotational",
        res,
        {
            "p_theta_conserved": res.minima.get("p_theta_conservation", -np.inf) >= -1e-8,
            "radius_nondecreasing": res.minima.get("radius_increments", -np.inf) >= -BOUND_SLACK,
        },
        {"c": c, "T": T, "seed": seed, "method": cfg.method},
    )


def verify_all(
    V: PotentialModel,
    c: float,
    checks: Sequence[str] = CHECKS,
    samples: int = 100_000,
    seed: int = 0,
    grid: int = 64,
    R2: Optional[float] = None,
    e: Optional[float] = None,
) -> List[CertificateReport]:
    """
    Run a selection of checks for a potential at energy c.

    Args:
        V:          Potential model.
        c:          Energy value.
        checks:     Names from CHECKS and EXTRA_CHECKS.
        samples:    Samples per sampled lemma.
        seed:       Seed shared by the samplers.
        grid:       Grid size per axis of the perturbation class check.
        R2:         Truncation radius of the perturbation class check, from the energy branch if None.
        e:          Constant of the truncated no-return check, e of the rotational branch if None.
    Returns:
        List of CertificateReport, in the order of `checks`.
    """
    unknown = set(checks) - set(CHECKS) - set(EXTRA_CHECKS)
    if unknown:
        raise ValueError(f"Unknown checks: {sorted(unknown)}")
    full = full_model(V)
    reports = []
    for name in checks:
        certify_logger.info(f"Running check {name}")
        if name == "decay":
            reports.append(verify_decay_conditions(V, r_max=100 * V.R1))
        elif name == "hset":
            reports.append(verify_hset_membership(V, c, R2 or truncation_radius(V, c), grid))
        elif name == "gap":
            r_top = c**2 / (2 * V.a)
            if r_top <= V.R1:
                raise EnergyBelowThreshold(f"c = {c} leaves no room between R1 and c^2/(2a).")
            reports.append(verify_energy_gap(full, c, V.R1, V.R1 + (r_top - V.R1) / 2, samples, seed))
        elif name == "no-return":
            reports.append(verify_no_return_full(full, c, samples, seed))
        elif name == "no-return-truncated":
            e_used = e or thresholds(V.a, V.R1, c).e_rot
            if not e_used > 0:
                raise EnergyBelowThreshold(f"c = {c} gives no positive e for the truncated model.")
            reports.append(verify_no_return_truncated(V, c, e_used, samples, seed))
        elif name == "no-max":
            reports.append(verify_no_max_annulus(V, c, samples, seed))
        elif name == "far-field":
            reports.append(verify_far_field_return(V, c, samples, seed))
        elif name == "rotational":
            reports.append(verify_rotational_confinement(full, c, seed=seed))
    return reports
