"""Long-format curve CSV files and JSON model documents.

Dataset CSV layout, one sample per row::

    obs_id,var_name,time,value
    obs0001,X1,0.0,0.013
    obs0001,__output__,1.1,0.82

The reserved variable name ``__output__`` holds the response curve.  Each
(observation, variable) pair may have its own time grid.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from .curves import Curve
from .dataset import Dataset
from .errors import DuplicateSample, IncompleteObservation, InputError, InvalidParams
from .forest import FOREST_FORMAT, Forest
from .tree import TREE_FORMAT, Tree

__all__ = [
    "OUTPUT_NAME",
    "load_dataset",
    "load_inputs",
    "write_dataset",
    "write_truth",
    "write_curves",
    "save_model",
    "load_model",
    "dump_model",
]

OUTPUT_NAME = "__output__"
HEADER = ["obs_id", "var_name", "time", "value"]


def _read_records(path):
    samples = defaultdict(dict)  # (obs, var) -> {time: value}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise InputError(f"{path}: header must be {','.join(HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise InputError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            obs, var = row[0].strip(), row[1].strip()
            try:
                t, v = float(row[2]), float(row[3])
            except ValueError:
                raise InputError(f"{path}:{lineno}: time and value must be numbers") from None
            cell = samples[obs, var]
            if t in cell:
                raise DuplicateSample(f"{path}:{lineno}: duplicate sample ({obs}, {var}, {t!r})")
            cell[t] = v
    return samples


def _curve(cell) -> Curve:
    times = np.array(sorted(cell))
    return Curve(times, np.array([cell[t] for t in times]))


def load_dataset(path, variables=None, require_output: bool = True) -> Dataset:
    """Build a :class:`Dataset` from a long-format CSV.

    ``variables`` declares the input variables and their order; by default
    every non-output name in the file is used, sorted.  Observations are
    ordered by ``obs_id``.
    """
    samples = _read_records(path)
    if not samples:
        raise InputError(f"{path}: no samples")
    obs_ids = sorted({o for o, _ in samples})
    names = sorted({v for _, v in samples if v != OUTPUT_NAME})
    if variables is not None:
        variables = list(variables)
        unknown = set(variables) - set(names)
        if unknown:
            raise IncompleteObservation(f"declared variables absent from file: {sorted(unknown)}")
        names = variables
    if not names:
        raise InputError(f"{path}: no input variables")
    inputs = []
    for var in names:
        col = []
        for o in obs_ids:
            if (o, var) not in samples:
                raise IncompleteObservation(f"observation {o} lacks variable {var}")
            col.append(_curve(samples[o, var]))
        inputs.append(col)
    outputs = None
    has_output = any((o, OUTPUT_NAME) in samples for o in obs_ids)
    if require_output or has_output:
        outputs = []
        for o in obs_ids:
            if (o, OUTPUT_NAME) not in samples:
                raise IncompleteObservation(f"observation {o} lacks the output curve")
            outputs.append(_curve(samples[o, OUTPUT_NAME]))
    return Dataset(inputs, outputs, names, obs_ids)


def load_inputs(path) -> tuple[list, list]:
    """Prediction inputs: ``(obs_ids, [{var_name: Curve}, ...])``.

    Variables may be missing; prediction fails only if a tree needs one.
    """
    by_obs = defaultdict(dict)
    for (o, v), cell in _read_records(path).items():
        if v != OUTPUT_NAME:
            by_obs[o][v] = _curve(cell)
    obs_ids = sorted(by_obs)
    return obs_ids, [by_obs[o] for o in obs_ids]


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(HEADER)
        for i, o in enumerate(dataset.obs_ids):
            for name, col in zip(dataset.variable_names, dataset.inputs):
                for t, v in zip(col[i].times, col[i].values):
                    w.writerow([o, name, repr(float(t)), repr(float(v))])
            if dataset.outputs is not None:
                c = dataset.outputs[i]
                for t, v in zip(c.times, c.values):
                    w.writerow([o, OUTPUT_NAME, repr(float(t)), repr(float(v))])


def write_truth(obs_ids, truth, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["obs_id", "G1", "G2", "beta"])
        for o, (g1, g2), b in zip(obs_ids, truth.groups, truth.beta):
            w.writerow([o, int(g1), int(g2), repr(float(b))])


def write_curves(obs_ids, curves, path) -> None:
    """Predictions as ``obs_id,time,value`` rows on each curve's own grid."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["obs_id", "time", "value"])
        for o, c in zip(obs_ids, curves):
            for t, v in zip(c.times, c.values):
                w.writerow([o, repr(float(t)), repr(float(v))])


def dump_model(model) -> str:
    return json.dumps(model.to_dict(), separators=(",", ":"))


def save_model(model, path) -> None:
    Path(path).write_text(dump_model(model) + "\n", encoding="utf-8")


def load_model(path):
    """Load a tree or forest document, dispatching on its ``format`` field."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    fmt = doc.get("format")
    if fmt == FOREST_FORMAT:
        return Forest.from_dict(doc)
    if fmt == TREE_FORMAT:
        return Tree.from_dict(doc)
    raise InvalidParams(f"{path}: unknown model format {fmt!r}")
