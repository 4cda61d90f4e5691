"""General utilities for command line tools"""

import sys
import logging
import argparse

import pint

from pathlib import Path
from typing import List, Optional, Sequence

from .. import __version__, split_vector, units_of_angle

# Flags whose values may start with a minus sign, eg. --q1 -0.5,0
VECTOR_FLAGS = ("--q0", "--q1", "--s0", "--y0")

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"

version_parser = argparse.ArgumentParser(add_help=False)
version_parser.add_argument(
    "-V",
    "--version",
    action="version",
    version="%(prog)s: two-boost problem tools {version}".format(version=__version__),
)

config_parser = argparse.ArgumentParser(add_help=False)
config_parser.add_argument("--config", type=str, help="JSON config file. Flags override its values.")
config_parser.add_argument("--preset", type=str, help="Name of a shipped preset, eg. powerlaw_two_boost.")
config_parser.add_argument(
    "-c",
    "--show-config",
    action="store_true",
    default=False,
    dest="show_config",
    help="Show the merged configuration and exit.",
)
config_parser.add_argument("--debug", action="store_const", const=True, help="Log at DEBUG level.")
config_parser.add_argument("--log-file", type=str, dest="log_file", help="Also write the log to this file.")

model_parser = argparse.ArgumentParser(add_help=False)
model_parser.add_argument("--model", type=str, help='Model descriptor, eg. "powerlaw:a=2,R1=1" or "cr3bp:mu=0.5".')
model_parser.add_argument("--a", type=float, help="Decay constant.")
model_parser.add_argument("--R1", type=float, help="Decay radius.")
model_parser.add_argument("--mu", type=float, help="Mass ratio for the cr3bp model.")
model_parser.add_argument("--c", type=float, help="Energy value.")
model_parser.add_argument(
    "--hamiltonian",
    choices=("full", "truncated", "free"),
    help="Which Hamiltonian to use with the potential.",
)

output_parser = argparse.ArgumentParser(add_help=False)
output_parser.add_argument("-o", "--output", type=str, help="Output file, stdout if not given.")
output_parser.add_argument("--format", choices=("json", "csv", "h5"), help="Output format.")


def vector_type(size: int):
    """
    Argparse type for comma separated vectors of a given size, eg. "0.5,0".
    """

    def convert(text: str) -> List[float]:
        try:
            return split_vector(text, size)
        except ValueError as err:
            raise argparse.ArgumentTypeError(str(err))

    convert.__name__ = f"vector{size}"
    return convert


def polar_state_type(text: str) -> List[float]:
    """
    Argparse type for a polar state "r,theta,p_r,p_theta".
    theta accepts units, eg. "2,90deg,0,4", and bare numbers are radians.
    """
    tokens = [t for t in text.replace(",", " ").split() if t]
    if len(tokens) != 4:
        raise argparse.ArgumentTypeError(f"Expected r,theta,p_r,p_theta, got {text!r}.")
    try:
        r, p_r, p_theta = (float(tokens[i]) for i in (0, 2, 3))
        theta = units_of_angle(tokens[1])
    except (ValueError, pint.errors.PintError) as err:
        raise argparse.ArgumentTypeError(str(err))
    return [r, theta, p_r, p_theta]


endpoints_parser = argparse.ArgumentParser(add_help=False)
endpoints_parser.add_argument("--q0", type=vector_type(2), help="Base point of the starting fiber, eg. 0.5,0.")
endpoints_parser.add_argument("--q1", type=vector_type(2), help="Base point of the target fiber, eg. -0.5,0.")


def attach_vector_values(argv: Sequence[str]) -> List[str]:
    """
    Glue vector flags to their value, so that "--q1 -0.5,0" is not read as two options.
    """
    out = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in VECTOR_FLAGS and i + 1 < len(argv):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def is_phil_arg(token: str) -> bool:
    return "=" in token or token.endswith(".phil")


class _SplitChecks(argparse.Action):
    """Separate check names from phil arguments in the positional list."""

    def __init__(self, option_strings, dest, choices_list=(), **kwargs):
        self.choices_list = tuple(choices_list)
        super().__init__(option_strings, dest, **kwargs)

    def __call__(self, parser, namespace, values, option_string=None):
        checks = []
        phil_args = []
        for v in values or []:
            if is_phil_arg(v):
                phil_args.append(v)
            elif v in self.choices_list:
                checks.append(v)
            else:
                parser.error(f"invalid check {v!r} (choose from {', '.join(self.choices_list)})")
        setattr(namespace, "checks", checks)
        setattr(namespace, self.dest, phil_args)


def setup_logging(logger: logging.Logger, debug: bool = False, log_file: Optional[str] = None):
    """
    Attach a stderr handler (and optionally a file handler) to a logger.
    stdout is left for the results.
    """
    formatter = logging.Formatter(LOG_FORMAT)
    logger.setLevel(logging.DEBUG if debug else logging.INFO)
    for h in list(logger.handlers):
        logger.removeHandler(h)
        h.close()
    SH = logging.StreamHandler(sys.stderr)
    SH.setFormatter(formatter)
    logger.addHandler(SH)
    if log_file:
        FH = logging.FileHandler(Path(log_file).expanduser().resolve(), mode="a")
        FH.setLevel(logging.DEBUG)
        FH.setFormatter(formatter)
        logger.addHandler(FH)
