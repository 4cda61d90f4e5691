"""
Define phil scopes describing model, energy, endpoints, certificates, integration, shooting, propagation and output.
"""

import json
import freephil

from pathlib import Path
from typing import Any, Dict, List, Union

from ..models.Potentials import parse_descriptor

model_scope = freephil.parse(
    """
    model {
      kind = *powerlaw cr3bp free
        .type = choice
        .help = "Potential family. free means V = 0."
      a = None
        .type = float
        .help = "Decay constant, V <= a/r outside B(R1). For cr3bp computed from mu and R1 if not given."
      R1 = None
        .type = float
        .help = "Decay radius. For cr3bp defaults to max(2(1 - mu), |q0|, |q1|)."
      mu = None
        .type = float
        .help = "Mass ratio of the restricted three body problem, in (0, 1/2]."
      coefficient = None
        .type = float
        .help = "Coefficient k of a power law k/r, if different from a. Only meant for negative tests."
      hamiltonian = *full truncated free
        .type = choice
        .help = "Hamiltonian: H = H0 - V, the truncated H1 = H0 - chi0*chi1*V, or the free H0."
    }
    """
)

energy_scope = freephil.parse(
    """
    energy {
      c = None
        .type = float
        .help = "Energy value."
    }
    """
)

endpoints_scope = freephil.parse(
    """
    endpoints {
      q0 = 0 0
        .type = floats(size = 2)
        .help = "Base point of the starting fiber."
      q1 = 0 0
        .type = floats(size = 2)
        .help = "Base point of the target fiber."
    }
    """
)

certificate_scope = freephil.parse(
    """
    certificate {
      samples = 100000
        .type = int
        .help = "Samples per sampled lemma."
      seed = 0
        .type = int
        .help = "Seed of the random sampler."
      grid = 64
        .type = int
        .help = "Grid points per axis for the perturbation class check."
      R2 = None
        .type = float
        .help = "Truncation radius for the perturbation class check. Chosen from the energy branch if not given."
      e = None
        .type = float
        .help = "Constant e of the truncated no-return check, defaults to e of the rotational branch."
    }
    """
)

integrator_scope = freephil.parse(
    """
    integrator {
      method = *RK45 DOP853 implicit_midpoint
        .type = choice
        .help = "Integration method."
      abs_tol = 1e-12
        .type = float
      rel_tol = 1e-12
        .type = float
      max_step = None
        .type = float
        .help = "Maximum step of the adaptive methods."
      step = 0.001
        .type = float
        .help = "Fixed step of the implicit midpoint rule."
      energy_drift_bound = 1e-8
        .type = float
        .help = "Relative energy drift above which a warning is logged."
    }
    """
)

shooting_scope = freephil.parse(
    """
    shooting {
      psi_grid = 64
        .type = int
        .help = "Number of starting angles on the fiber circle."
      t_grid = 16
        .type = int
        .help = "Maximum number of duration seeds per angle."
      min_eta = 0.001
        .type = float
      max_eta = 50
        .type = float
      newton_tol = 1e-10
        .type = float
      method = *DOP853 RK45
        .type = choice
      escape_radius = None
        .type = float
        .help = "Orbits leaving this radius are dropped. Defaults to 20 max(R1, |q0|, |q1|)."
      samples = 2001
        .type = int
        .help = "Samples per chord."
      positive = *eta action both
        .type = choice
        .help = "Which sign defines positive chords: duration, action or both."
    }
    """
)

propagation_scope = freephil.parse(
    """
    propagation {
      s0 = None
        .type = floats(size = 4)
        .help = "Initial state q1 q2 p1 p2."
      y0 = None
        .type = floats(size = 4)
        .help = "Initial state in the polar chart, r theta p_r p_theta, theta in radians. Used if s0 is not given."
      T = None
        .type = str
        .help = "Duration, nondimensional."
      samples = 1001
        .type = int
    }
    """
)

output_scope = freephil.parse(
    """
    output {
      path = None
        .type = path
        .help = "Output file. If not given, results are written to stdout."
      format = json csv h5
        .type = choice
        .help = "Output format. Defaults to csv for propagate and json otherwise."
    }
    """
)


def _phil_value(v: Any) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(_phil_value(x) for x in v)
    return str(v)


def flatten_config(config: Dict[str, Any], prefix: str = "") -> List[str]:
    """
    Flatten a nested dictionary into dotted phil assignments, eg. {"energy": {"c": 3}} -> ["energy.c=3"].
    """
    out = []
    for k, v in config.items():
        name = f"{prefix}.{k}" if prefix else k
        if isinstance(v, dict):
            out.extend(flatten_config(v, name))
        else:
            out.append(f"{name}={_phil_value(v)}")
    return out


def read_json_config(path: Union[Path, str]) -> List[str]:
    """
    Read a JSON config file as phil assignments.

    A "model" entry may be a descriptor string like "powerlaw:a=2,R1=1" instead of a dictionary.
    """
    with open(path, "r") as fh:
        config = json.load(fh)
    if isinstance(config.get("model"), str):
        config["model"] = parse_descriptor(config["model"])
    return flatten_config(config)
