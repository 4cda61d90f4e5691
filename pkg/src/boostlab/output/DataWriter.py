"""
Writers for certificates, trajectories and chords.
"""

import sys
import logging

import h5py
import numpy as np

from pathlib import Path
from hdf5plugin import Bitshuffle
from typing import Any, Dict, List, Optional, TextIO, Union

from . import create_attributes, dumps_json
from .. import __version__
from ..phase_space import angular_momentum

output_logger = logging.getLogger("Boostlab.output")

TRAJECTORY_HEADER = "t,q1,q2,p1,p2,H,p_theta"


def write_json(obj: Any, path: Optional[Union[Path, str]] = None, stream: TextIO = None):
    """
    Write an object as deterministic JSON to a file, or to a stream (stdout by default).
    """
    text = dumps_json(obj) + "\n"
    if path is None:
        (stream or sys.stdout).write(text)
        return
    Path(path).write_text(text)
    output_logger.info(f"JSON written to {path}")


def trajectory_table(times: np.ndarray, samples: np.ndarray, energy: np.ndarray) -> np.ndarray:
    """
    Rows (t, q1, q2, p1, p2, H, p_theta).
    """
    return np.column_stack([times, samples, energy, angular_momentum(samples.T)])


def _write_table(table: np.ndarray, path: Optional[Union[Path, str]], stream: TextIO = None):
    target = path if path is not None else (stream or sys.stdout)
    np.savetxt(target, table, fmt="%.17g", delimiter=",", header=TRAJECTORY_HEADER, comments="")
    if path is not None:
        output_logger.info(f"CSV written to {path}")


def write_trajectory_csv(traj, path: Optional[Union[Path, str]] = None, stream: TextIO = None):
    _write_table(trajectory_table(traj.times, traj.samples, traj.energy), path, stream)


def write_chord_csv(chord, model, path: Optional[Union[Path, str]] = None, stream: TextIO = None):
    """
    Write a chord with the trajectory columns. t is the physical time eta * t_k.
    """
    energy = model.energy_xy(chord.samples.T)
    _write_table(trajectory_table(chord.eta * chord.times, chord.samples, energy), path, stream)


def write_trajectory_h5(traj, path: Union[Path, str], metadata: Dict[str, Any] = None):
    """
    Write a trajectory to an HDF5 file.
    The samples table is Bitshuffle compressed, diagnostics and metadata are stored as attributes.

    Args:
        traj:       Trajectory.
        path:       Output file.
        metadata:   Additional attributes, eg. the model descriptor and the integrator settings.
    """
    metadata = metadata or {}
    with h5py.File(path, "w") as fh:
        create_attributes(fh, ("program", "version"), ("boostlab", __version__))
        grp = fh.create_group("trajectory")
        table = trajectory_table(traj.times, traj.samples, traj.energy)
        dset = grp.create_dataset("samples", data=table, **Bitshuffle())
        create_attributes(dset, ("columns",), (TRAJECTORY_HEADER,))
        create_attributes(
            grp,
            ("energy_drift", "max_radius", "p_theta_drift", "drift_ok") + tuple(metadata.keys()),
            (traj.energy_drift, traj.max_radius, traj.p_theta_drift, traj.drift_ok) + tuple(metadata.values()),
        )
    output_logger.info(f"Trajectory written to {path}")


def write_chords_h5(chords: List, model, path: Union[Path, str], metadata: Dict[str, Any] = None):
    """
    Write a set of chords to an HDF5 file, one group per chord in action order.
    """
    metadata = metadata or {}
    with h5py.File(path, "w") as fh:
        create_attributes(
            fh,
            ("program", "version", "n_chords") + tuple(metadata.keys()),
            ("boostlab", __version__, len(chords)) + tuple(metadata.values()),
        )
        for k, chord in enumerate(chords):
            grp = fh.create_group(f"chord_{k:03d}")
            energy = model.energy_xy(chord.samples.T)
            table = trajectory_table(chord.eta * chord.times, chord.samples, energy)
            dset = grp.create_dataset("samples", data=table, **Bitshuffle())
            create_attributes(dset, ("columns",), (TRAJECTORY_HEADER,))
            summary = chord.to_json(include_samples=False)
            create_attributes(grp, tuple(summary.keys()), tuple(summary.values()))
    output_logger.info(f"{len(chords)} chord(s) written to {path}")
