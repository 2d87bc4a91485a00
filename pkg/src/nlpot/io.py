"""Deterministic JSON, CSV field dumps and measure files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .fields import SampledField
from .measures import AtomicMeasure, CellDensityMeasure, Measure


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def write_field_csv(path, nodes, values, errors=None) -> None:
    """One coordinate column per dimension, then value, then error bound."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    values = np.asarray(values, dtype=float).reshape(-1)
    errors = np.zeros_like(values) if errors is None else np.asarray(errors, dtype=float).reshape(-1)
    n = nodes.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k}" for k in range(n)] + ["value", "error"])
        for x, v, e in zip(nodes, values, errors):
            w.writerow([repr(float(c)) for c in x] + [repr(float(v)), repr(float(e))])


def read_field_csv(path) -> SampledField:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    n = sum(1 for c in head if c.startswith("x"))
    return SampledField(body[:, :n], body[:, n], errors=body[:, n + 1] if len(head) > n + 1 else None)


def save_measure(path, mu: Measure) -> None:
    if isinstance(mu, CellDensityMeasure):
        np.savez(path, kind="cells", origin=mu.origin, cell_size=mu.cell_size,
                 extents=np.array(mu.extents), density=mu.density)
    else:
        np.savez(path, kind="atoms", points=mu.points, masses=mu.masses)


def load_measure(path) -> Measure:
    with np.load(path) as z:
        if str(z["kind"]) == "cells":
            return CellDensityMeasure(z["origin"], float(z["cell_size"]), tuple(int(v) for v in z["extents"]), z["density"])
        return AtomicMeasure(z["points"], z["masses"])
