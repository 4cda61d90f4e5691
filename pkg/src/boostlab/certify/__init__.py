"""
Sampled certificates for the confinement lemmas: reports, energy thresholds and the seeded batch runner.
"""

import math
import logging

import numpy as np

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from .. import worker_count
from ..errors import EnergyBelowThreshold, OutOfRange

certify_logger = logging.getLogger("Boostlab.certify")

# Minimum margin needed to call a sampled inequality strict
DEFAULT_TOLERANCE = 1e-12
# Points handed to a single sampling kernel call
BATCH_SIZE = 8192


@dataclass(frozen=True)
class CertificateReport:
    """
    Outcome of a sampled verification.

    A report passes when the minimum margin reaches the tolerance and every auxiliary
    bound recorded in `bounds` holds.
    """

    name: str
    min_margin: float
    worst_point: Optional[Dict[str, float]]
    samples: int
    tolerance: float = DEFAULT_TOLERANCE
    bounds: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.min_margin >= self.tolerance and all(self.bounds.values()))

    def to_json(self) -> Dict[str, Any]:
        return {
            "check": self.name,
            "pass": self.passed,
            "margin": float(self.min_margin),
            "worst_point": self.worst_point,
            "samples": int(self.samples),
            "tolerance": self.tolerance,
            "bounds": dict(self.bounds),
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class ThresholdSet:
    a: float
    R1: float
    cond_c: float
    rot_threshold: float
    rot_threshold_prop: float
    c: Optional[float] = None
    e_rot: Optional[float] = None
    R2_rot: Optional[float] = None
    R2_noMax: Optional[float] = None
    branch: Optional[str] = None

    @property
    def rot_energy_floor(self) -> float:
        """Energy floor for the rotational branch, the stricter of the two rotational thresholds."""
        return max(self.rot_threshold, self.rot_threshold_prop)

    def to_json(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "R1": self.R1,
            "c": self.c,
            "cond_c": self.cond_c,
            "rot_threshold": self.rot_threshold,
            "rot_threshold_prop": self.rot_threshold_prop,
            "rot_energy_floor": self.rot_energy_floor,
            "e_rot": self.e_rot,
            "R2_rot": self.R2_rot,
            "R2_noMax": self.R2_noMax,
            "branch": self.branch,
        }


def energy_condition(a: float, R1: float) -> float:
    return max((32 * a**2) ** (1 / 3), math.sqrt(4 * a * (3 * R1 + 2 * (2 * a) ** (1 / 3))))


def thresholds(a: float, R1: float, c: Optional[float] = None) -> ThresholdSet:
    """
    Energy thresholds and truncation radii for decay constants (a, R1).

    Args:
        a:      Decay constant, V <= a/r outside B(R1).
        R1:     Decay radius.
        c:      Optional energy value. If passed, also compute e, both truncation radii and the branch.
    Returns:
        ThresholdSet
    """
    if a <= 0 or R1 <= 0:
        raise ValueError(f"Decay constants must be positive, got a={a}, R1={R1}.")
    cond_c = energy_condition(a, R1)
    rot = math.sqrt(2 * a * R1)
    rot_prop = math.sqrt(2 * a * R1**2)
    if c is None:
        return ThresholdSet(a, R1, cond_c, rot, rot_prop)
    if c <= 0:
        raise ValueError(f"Energy value must be positive, got {c}.")
    e_rot = (c**2 - 2 * a * R1) / (2 * (c + R1**2))
    R2_rot = R1 + 2 * a / e_rot if e_rot > 0 else None
    R2_noMax = (c**2 + 2 * a * R1) / (8 * a)
    if c > cond_c:
        branch = "general"
    elif c > max(rot, rot_prop):
        branch = "rotational"
    else:
        branch = None
    return ThresholdSet(a, R1, cond_c, rot, rot_prop, c, e_rot, R2_rot, R2_noMax, branch)


def energy_gap_bound(c: float, a: float, r: float, R1: Optional[float] = None) -> float:
    """
    Lower bound for c - p_theta on H^-1(c) at radius r, (c^2 - 2ar)/(2(c + r^2)).

    Valid for r in [R1, c^2/(2a)), where the bound is positive and strictly decreasing in r.
    Radii below R1 are rejected when R1 is passed.
    """
    if R1 is not None and r < R1:
        raise OutOfRange(f"Radius {r} is inside B(R1), R1 = {R1}.")
    if r < 0 or r >= c**2 / (2 * a):
        raise OutOfRange(f"Radius {r} outside [0, c^2/(2a)) = [0, {c**2 / (2 * a)}).")
    return (c**2 - 2 * a * r) / (2 * (c + r**2))


def truncation_radius(V, c: float) -> float:
    """
    Outer radius R2 of the cutoff for potential V at energy c.

    Above the general energy condition R2 = (c^2 + 2aR1)/(8a). Below it, rotationally
    invariant potentials above the rotational floor use R2 = R1 + 2a/e.
    """
    ts = thresholds(V.a, V.R1, c)
    if ts.branch == "general":
        return ts.R2_noMax
    if ts.branch == "rotational" and V.rotationally_invariant:
        return ts.R2_rot
    raise EnergyBelowThreshold(
        f"c = {c} is below the energy condition {ts.cond_c:.6g}"
        + (f" and the rotational floor {ts.rot_energy_floor:.6g}." if V.rotationally_invariant else ".")
    )


@dataclass
class BatchResult:
    """
    Reduction of one sampling batch: the minimum margin with its point, and minima of auxiliary quantities.
    """

    margin: float = math.inf
    worst_point: Optional[Dict[str, float]] = None
    count: int = 0
    minima: Dict[str, float] = field(default_factory=dict)

    def merge(self, other: "BatchResult") -> "BatchResult":
        if other.margin < self.margin:
            self.margin = other.margin
            self.worst_point = other.worst_point
        self.count += other.count
        for k, v in other.minima.items():
            self.minima[k] = min(self.minima.get(k, math.inf), v)
        return self


def run_batches(
    kernel: Callable[[np.random.Generator, int], BatchResult],
    samples: int,
    seed: int = 0,
    batch_size: int = BATCH_SIZE,
) -> BatchResult:
    """
    Run a sampling kernel over batches in parallel and min-reduce the results.

    Every batch gets its own generator spawned from SeedSequence(seed), and results are merged
    in batch order, so the outcome does not depend on the number of worker threads.

    Args:
        kernel:     Callable (rng, n) -> BatchResult.
        samples:    Total number of samples.
        seed:       Seed of the root sequence.
        batch_size: Samples per batch.
    Returns:
        The merged BatchResult.
    """
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results: List[BatchResult] = list(
            pool.map(lambda job: kernel(np.random.default_rng(job[0]), job[1]), zip(children, sizes))
        )
    merged = BatchResult()
    for res in results:
        merged.merge(res)
    return merged


def point_dict(y: np.ndarray, idx: int, names=("r", "theta", "p_r", "p_theta")) -> Dict[str, float]:
    return {n: float(y[i][idx]) for i, n in enumerate(names)}
