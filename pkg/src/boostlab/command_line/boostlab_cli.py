"""
Command line tool for the two-boost problem: energy thresholds, numerical certificates,
chord search and flow propagation.
"""

import sys
import math
import shutil
import logging
import argparse

import freephil
import pint

try:
    from importlib.resources import files
except ImportError:
    # Python < 3.9 compatibility
    from importlib_resources import files

from pathlib import Path
from typing import Any, Dict, List, Optional

from . import (
    version_parser,
    config_parser,
    model_parser,
    endpoints_parser,
    output_parser,
    vector_type,
    polar_state_type,
    attach_vector_values,
    setup_logging,
    _SplitChecks,
)
from .boost_phil import read_json_config
from .. import presets
from ..certify import thresholds, truncation_radius
from ..certify.Lemmas import CHECKS, EXTRA_CHECKS, verify_all
from ..chords import ShootingProblem
from ..chords.Action import check_confinement
from ..chords.Shooting import find_chords
from ..dynamics import IntegratorConfig
from ..dynamics.Propagator import flow
from ..errors import BoostlabError, NoChordFound
from ..models import model_from_descriptor
from ..models.Hamiltonians import build_truncated, free_model, full_model
from ..models.Potentials import parse_descriptor
from ..output import dumps_json
from ..phase_space import PolarState, to_cartesian
from ..output.DataWriter import (
    trajectory_table,
    write_chord_csv,
    write_chords_h5,
    write_json,
    write_trajectory_csv,
    write_trajectory_h5,
)

master_phil = freephil.parse(
    """
    include scope boostlab.command_line.boost_phil.model_scope
    include scope boostlab.command_line.boost_phil.energy_scope
    include scope boostlab.command_line.boost_phil.endpoints_scope
    include scope boostlab.command_line.boost_phil.certificate_scope
    include scope boostlab.command_line.boost_phil.integrator_scope
    include scope boostlab.command_line.boost_phil.shooting_scope
    include scope boostlab.command_line.boost_phil.propagation_scope
    include scope boostlab.command_line.boost_phil.output_scope
    """,
    process_includes=True,
)


# Define a logger object
logger = logging.getLogger("Boostlab.cli")

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3
EXIT_INTERNAL = 4

# Flags shared by all model based subcommands, mapped to phil parameters
MODEL_FLAGS = {
    "a": "model.a",
    "R1": "model.R1",
    "mu": "model.mu",
    "hamiltonian": "model.hamiltonian",
    "c": "energy.c",
    "q0": "endpoints.q0",
    "q1": "endpoints.q1",
    "output": "output.path",
    "format": "output.format",
}

# Keys accepted by the --model descriptor
DESCRIPTOR_KEYS = ("a", "R1", "mu", "coefficient")


def _phil_word(v: Any) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


def descriptor_to_phil(text: str) -> List[str]:
    """
    Turn a model descriptor into phil assignments, eg. "cr3bp:mu=0.5" -> ["model.kind=cr3bp", "model.mu=0.5"].
    """
    params = parse_descriptor(text)
    kind = params.pop("kind")
    if kind in ("none", ""):
        kind = "free"
    unknown = set(params) - set(DESCRIPTOR_KEYS)
    if unknown:
        raise ValueError(f"Unknown descriptor keys {sorted(unknown)} in {text!r}.")
    return [f"model.kind={kind}"] + [f"model.{k}={v!r}" for k, v in params.items()]


def flags_to_phil(args: argparse.Namespace) -> List[str]:
    out = descriptor_to_phil(args.model) if getattr(args, "model", None) else []
    for dest, name in {**MODEL_FLAGS, **args.flags}.items():
        value = getattr(args, dest, None)
        if value is not None:
            out.append(f"{name}={_phil_word(value)}")
    return out


def preset_path(name: str) -> Path:
    filename = name if name.endswith(".phil") else f"{name}.phil"
    found = [f for f in files(presets).iterdir() if f.name == filename]
    if not found:
        raise ValueError(f"No preset {name} found. Run boostlab presets list to see the available ones.")
    return Path(str(found[0]))


def fetch_params(args: argparse.Namespace):
    """
    Merge phil defaults, the JSON config file, presets, positional phil arguments and flags, in this order.

    Returns:
        The working phil scope.
    """
    cl = master_phil.command_line_argument_interpreter()
    try:
        json_args = read_json_config(args.config) if args.config else []
        preset_args = [str(preset_path(args.preset))] if args.preset else []
        working_phil = master_phil.fetch(
            cl.process_and_fetch(args=json_args + preset_args + args.phil_args + flags_to_phil(args))
        )
    except (BoostlabError, ValueError):
        raise
    except Exception as err:
        raise ValueError(f"Invalid parameters: {err}") from err
    return working_phil


def build_potential(params):
    m = params.model
    if m.kind == "free":
        return None
    desc: Dict[str, Any] = {"kind": m.kind}
    desc.update({k: getattr(m, k) for k in DESCRIPTOR_KEYS if getattr(m, k) is not None})
    V = model_from_descriptor(desc, params.endpoints.q0, params.endpoints.q1)
    logger.info(f"Potential: {V.to_descriptor()}")
    return V


def build_hamiltonian(params, V):
    kind = params.model.hamiltonian
    if V is None or kind == "free":
        return free_model()
    if kind == "truncated":
        c = require(params.energy.c, "energy value c (--c)")
        R2 = params.certificate.R2 or truncation_radius(V, c)
        logger.info(f"Truncated Hamiltonian with R2 = {R2:.6g}")
        return build_truncated(V, c, R2)
    return full_model(V)


def require(value, what: str):
    if value is None:
        raise ValueError(f"Missing {what}.")
    return value


def _output_format(params, default: str) -> str:
    return params.output.format or default


def cmd_thresholds(args, params) -> int:
    m = params.model
    if m.a is not None and m.R1 is not None:
        a, R1 = m.a, m.R1
    elif m.kind == "cr3bp" and m.mu is not None:
        V = build_potential(params)
        a, R1 = V.a, V.R1
    else:
        raise ValueError("thresholds needs the decay constants --a and --R1 (or a cr3bp model).")
    ts = thresholds(a, R1, params.energy.c)
    logger.info(f"cond_c = {ts.cond_c:.6g}, rot_threshold = {ts.rot_threshold:.6g}")
    if ts.c is not None:
        logger.info(f"e = {ts.e_rot:.6g}, R2_rot = {ts.R2_rot}, R2_noMax = {ts.R2_noMax:.6g}, branch {ts.branch}")
    write_json(ts.to_json(), params.output.path)
    return EXIT_OK


def cmd_verify(args, params) -> int:
    V = build_potential(params)
    if V is None:
        raise ValueError("verify needs a potential, not the free model.")
    c = require(params.energy.c, "energy value c (--c)")
    checks = args.checks or ["all"]
    if "all" in checks:
        checks = list(CHECKS) + [ch for ch in checks if ch in EXTRA_CHECKS]
    cert = params.certificate
    reports = verify_all(V, c, checks, cert.samples, cert.seed, cert.grid, cert.R2, cert.e)
    for report in reports:
        status = "pass" if report.passed else "FAIL"
        logger.info(f"{report.name:<20} {status}  margin {report.min_margin:.3e}")
    passed = all(report.passed for report in reports)
    result = {
        "model": V.to_descriptor(),
        "c": c,
        "reports": [report.to_json() for report in reports],
        "pass": passed,
    }
    write_json(result, params.output.path)
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_find_chord(args, params) -> int:
    V = build_potential(params)
    model = build_hamiltonian(params, V)
    c = require(params.energy.c, "energy value c (--c)")
    sh = params.shooting
    integ = params.integrator
    problem = ShootingProblem(
        model,
        tuple(params.endpoints.q0),
        tuple(params.endpoints.q1),
        c,
        psi_grid_size=sh.psi_grid,
        t_grid_size=sh.t_grid,
        min_eta=sh.min_eta,
        max_eta=sh.max_eta,
        newton_tol=sh.newton_tol,
        method=sh.method,
        rel_tol=integ.rel_tol,
        abs_tol=integ.abs_tol,
        escape_radius=sh.escape_radius,
        chord_samples=sh.samples,
        positive=sh.positive,
    )
    chords = find_chords(problem)
    if not chords:
        raise NoChordFound(f"No chord from q0={problem.q0} to q1={problem.q1} at c={c}.")

    logger.info(f"{'eta':>12} {'psi':>10} {'action':>14} {'residual':>10} {'max_radius':>10}")
    for ch in chords:
        logger.info(f"{ch.eta:12.6g} {ch.psi:10.6f} {ch.action:14.8g} {ch.residual:10.2e} {ch.max_radius:10.6g}")

    fmt = _output_format(params, "json")
    path = params.output.path
    if fmt == "csv":
        if len(chords) > 1:
            logger.info("CSV output holds the chord with the largest action only.")
        write_chord_csv(chords[0], model, path)
    elif fmt == "h5":
        write_chords_h5(chords, model, require(path, "output path (--output) for HDF5"), {"model": model.to_descriptor()})
    else:
        entries = []
        for ch in chords:
            entry = ch.to_json()
            entry["confined"] = check_confinement(ch, V.R1) if V is not None else None
            entries.append(entry)
        result = {
            "model": model.to_descriptor(),
            "c": c,
            "q0": list(problem.q0),
            "q1": list(problem.q1),
            "n_chords": len(chords),
            "chords": entries,
        }
        write_json(result, path)
    return EXIT_OK


def cmd_propagate(args, params) -> int:
    V = build_potential(params)
    model = build_hamiltonian(params, V)
    prop = params.propagation
    if prop.s0 is not None and prop.y0 is not None:
        raise ValueError("Give the initial state either in Cartesian (--s0) or in polar (--y0) coordinates, not both.")
    if prop.y0 is not None:
        s0 = to_cartesian(PolarState(*prop.y0)).as_array().tolist()
        logger.info(f"Initial state from polar coordinates: {s0}")
    else:
        s0 = require(prop.s0, "initial state (--s0 or --y0)")
    T = require(prop.T, "duration (--T)")
    integ = params.integrator
    cfg = IntegratorConfig(
        method=integ.method,
        abs_tol=integ.abs_tol,
        rel_tol=integ.rel_tol,
        max_step=integ.max_step or math.inf,
        step=integ.step,
        energy_drift_bound=integ.energy_drift_bound,
    )
    traj = flow(model, s0, T, cfg, n_samples=prop.samples)

    fmt = _output_format(params, "csv")
    path = params.output.path
    if fmt == "json":
        result = {
            "model": model.to_descriptor(),
            "s0": list(s0),
            "T": float(traj.times[-1]),
            "method": cfg.method,
            "energy_drift": traj.energy_drift,
            "p_theta_drift": traj.p_theta_drift,
            "max_radius": traj.max_radius,
            "drift_ok": traj.drift_ok,
            "samples": trajectory_table(traj.times, traj.samples, traj.energy),
        }
        write_json(result, path)
    elif fmt == "h5":
        write_trajectory_h5(
            traj, require(path, "output path (--output) for HDF5"), {"model": model.to_descriptor(), "method": cfg.method}
        )
    else:
        write_trajectory_csv(traj, path)
    return EXIT_OK


def list_presets(args) -> int:
    for f in sorted(files(presets).iterdir(), key=lambda f: f.name):
        if f.name.endswith(".phil"):
            print(f.name)
    return EXIT_OK


def get_preset(args) -> int:
    src = preset_path(args.name)
    odir = Path(args.output or ".").expanduser().resolve()
    shutil.copy(src, odir)
    logger.info(f"{src.name} copied to {odir}.")
    return EXIT_OK


def run_command(args) -> int:
    working_phil = fetch_params(args)
    if args.show_config:
        print(working_phil.as_str())
        return EXIT_OK
    return args.func(args, working_phil.extract())


# Parse command line arguments
parser = argparse.ArgumentParser(
    prog="boostlab",
    description=__doc__,
    parents=[version_parser],
)
subparsers = parser.add_subparsers(
    help="Run boostlab <command> --help to see the options for each command.",
    required=True,
    dest="command",
)
parser_thresholds = subparsers.add_parser(
    "thresholds",
    description="Energy thresholds and truncation radii for decay constants (a, R1).",
    parents=[config_parser, model_parser, output_parser],
)
parser_thresholds.add_argument("phil_args", nargs="*")
parser_thresholds.set_defaults(func=cmd_thresholds, flags={})

parser_verify = subparsers.add_parser(
    "verify",
    description="Run the numerical certificates. Exits with 0 only if all of them pass.",
    parents=[config_parser, model_parser, endpoints_parser, output_parser],
)
parser_verify.add_argument(
    "phil_args",
    nargs="*",
    action=_SplitChecks,
    choices_list=CHECKS + EXTRA_CHECKS + ("all",),
    help=f"Checks to run, any of {', '.join(CHECKS + EXTRA_CHECKS)} or all (default), and phil arguments.",
)
parser_verify.add_argument("--seed", type=int, help="Seed of the sampler.")
parser_verify.add_argument("--samples", type=int, help="Samples per sampled check.")
parser_verify.add_argument("--grid", type=int, help="Grid points per axis of the perturbation class check.")
parser_verify.add_argument("--R2", type=float, help="Truncation radius.")
parser_verify.add_argument("--e", type=float, help="Constant of the truncated no-return check.")
parser_verify.set_defaults(
    func=cmd_verify,
    checks=[],
    flags={
        "seed": "certificate.seed",
        "samples": "certificate.samples",
        "grid": "certificate.grid",
        "R2": "certificate.R2",
        "e": "certificate.e",
    },
)

parser_chord = subparsers.add_parser(
    "find-chord",
    description="Search for Hamiltonian chords between the fibers over q0 and q1 at energy c.",
    parents=[config_parser, model_parser, endpoints_parser, output_parser],
)
parser_chord.add_argument("phil_args", nargs="*")
parser_chord.add_argument("--psi-grid", type=int, dest="psi_grid", help="Number of starting angles.")
parser_chord.add_argument("--t-grid", type=int, dest="t_grid", help="Maximum number of duration seeds per angle.")
parser_chord.add_argument("--max-eta", type=float, dest="max_eta", help="Longest duration searched.")
parser_chord.add_argument("--positive", choices=("eta", "action", "both"), help="Positivity filter.")
parser_chord.add_argument("--samples", type=int, help="Samples per chord.")
parser_chord.add_argument("--R2", type=float, help="Truncation radius for --hamiltonian truncated.")
parser_chord.set_defaults(
    func=cmd_find_chord,
    flags={
        "psi_grid": "shooting.psi_grid",
        "t_grid": "shooting.t_grid",
        "max_eta": "shooting.max_eta",
        "positive": "shooting.positive",
        "samples": "shooting.samples",
        "R2": "certificate.R2",
    },
)

parser_propagate = subparsers.add_parser(
    "propagate",
    description="Integrate the flow from an initial state and write the trajectory, as CSV by default.",
    parents=[config_parser, model_parser, output_parser],
)
parser_propagate.add_argument("phil_args", nargs="*")
parser_propagate.add_argument("--s0", type=vector_type(4), help="Initial state q1,q2,p1,p2.")
parser_propagate.add_argument(
    "--y0", type=polar_state_type, help="Initial state in polar coordinates r,theta,p_r,p_theta, eg. 2,90deg,0,4."
)
parser_propagate.add_argument("--T", type=str, help="Duration, nondimensional.")
parser_propagate.add_argument("--samples", type=int, help="Number of samples.")
parser_propagate.add_argument("--method", choices=("RK45", "DOP853", "implicit_midpoint"), help="Integrator.")
parser_propagate.add_argument("--step", type=float, help="Step of the implicit midpoint rule.")
parser_propagate.set_defaults(
    func=cmd_propagate,
    flags={
        "s0": "propagation.s0",
        "y0": "propagation.y0",
        "T": "propagation.T",
        "samples": "propagation.samples",
        "method": "integrator.method",
        "step": "integrator.step",
    },
)

parser_presets = subparsers.add_parser("presets", description="List or copy the shipped parameter files.")
presets_sub = parser_presets.add_subparsers(required=True, dest="presets_command")
parser_list = presets_sub.add_parser("list", description="Print out the available preset files.")
parser_list.set_defaults(func=list_presets)
parser_get = presets_sub.add_parser("get", description="Copy a preset file to a directory.")
parser_get.add_argument("name", type=str, help="Preset name.")
parser_get.add_argument("-o", "--output", type=str, help="Output directory, current directory if not given.")
parser_get.set_defaults(func=get_preset)


def main(argv: Optional[List[str]] = None) -> int:
    argv = attach_vector_values(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    setup_logging(logging.getLogger("Boostlab"), bool(getattr(args, "debug", False)), getattr(args, "log_file", None))
    try:
        if args.command == "presets":
            return args.func(args)
        return run_command(args)
    except BoostlabError as err:
        logger.error(f"{type(err).__name__}: {err}")
        sys.stdout.write(dumps_json({"error": type(err).__name__, "message": str(err)}) + "\n")
        return EXIT_FAILURE
    except (ValueError, pint.errors.PintError) as err:
        sys.stderr.write(f"{parser.prog}: error: {err}\n")
        return EXIT_USAGE
    except Exception as err:
        logger.exception(err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
