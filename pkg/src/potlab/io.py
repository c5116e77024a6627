"""JSON file formats for measures (.msr), grid functions (.gf) and sampled functions (.sf).

Floats are written with ``repr``, the shortest string that reads back to the
same double, so save/load round-trips are bit-exact.
"""
from __future__ import annotations

import json
import os

import numpy as np

from .lorentz import SampledFunction
from .measure import DiscreteMeasure, measure_from_dict
from .operators import GridFunction


def write_json(path: str, doc) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, allow_nan=True)
        fh.write("\n")


def read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_measure(path: str, mu: DiscreteMeasure) -> None:
    write_json(path, mu.to_dict())


def load_measure(path: str) -> DiscreteMeasure:
    return measure_from_dict(read_json(path))


def save_grid(path: str, f: GridFunction) -> None:
    write_json(path, f.to_dict())


def load_grid(path: str) -> GridFunction:
    return GridFunction.from_dict(read_json(path))


def save_sampled(path: str, f: SampledFunction, measure_path: str) -> None:
    """Write ``f``; the measure is referenced by a path relative to the .sf file."""
    ref = os.path.relpath(os.path.abspath(measure_path), os.path.dirname(os.path.abspath(path)))
    write_json(path, f.to_dict(ref))


def load_sampled(path: str) -> SampledFunction:
    doc = read_json(path)
    ref = doc.get("measure_ref")
    if not ref:
        raise ValueError(f"{path}: missing measure_ref")
    mpath = ref if os.path.isabs(ref) else os.path.join(os.path.dirname(os.path.abspath(path)), ref)
    return SampledFunction(load_measure(mpath), np.asarray(doc["values"], dtype=float))


def file_kind(path: str) -> str:
    ext = os.path.splitext(path)[1].lower()
    kinds = {".msr": "measure", ".gf": "grid", ".sf": "sampled"}
    if ext not in kinds:
        raise ValueError(f"{path}: unknown file type (expected .msr, .gf or .sf)")
    return kinds[ext]
