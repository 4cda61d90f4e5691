"""
Utilities for writing results to JSON, CSV and HDF5 files.
"""

import json
import math

import h5py
import numpy as np

from h5py import AttributeManager
from typing import Any, Tuple, Union


def create_attributes(h5_obj: Union[h5py.Group, h5py.Dataset], names: Tuple, values: Tuple):
    """
    Create or overwrite attributes with additional metadata information.

    Args:
        h5_obj:     HDF5 object (Group or Dataset) to which the attributes should be attached
        names:      Tuple containing the names of the new attributes
        values:     Tuple containing the values relative to the names
    """
    for n, v in zip(names, values):
        if v is None:
            v = "none"
        if isinstance(v, (dict, list)):
            v = dumps_json(v, indent=None)
        if type(v) is str:
            # If a string, convert to numpy.bytes_
            v = np.bytes_(v)
        AttributeManager.create(h5_obj, name=n, data=v)


def _to_builtin(obj: Any):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def _finite(obj: Any):
    # JSON has no inf/nan, write them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps_json(obj: Any, indent: Union[int, None] = 2) -> str:
    """
    Deterministic JSON: sorted keys, fixed indentation, numpy values converted to builtins.
    """
    text = json.dumps(obj, default=_to_builtin)
    return json.dumps(_finite(json.loads(text)), sort_keys=True, indent=indent)
