import json

import numpy as np
import pytest

from nlpot.io import dumps, load_measure, read_field_csv, save_measure, write_field_csv
from nlpot.measures import AtomicMeasure, CellDensityMeasure


def test_dumps_is_sorted_and_rejects_nan():
    assert dumps({"b": 1, "a": [0.1]}) == '{\n  "a": [\n    0.1\n  ],\n  "b": 1\n}\n'
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})
    assert json.loads(dumps({"x": 1e-300})) == {"x": 1e-300}


def test_field_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    nodes, vals = rng.random((5, 3)), rng.random(5) * 1e-7
    write_field_csv(tmp_path / "f.csv", nodes, vals, vals * 1e-3)
    f = read_field_csv(tmp_path / "f.csv")
    assert np.array_equal(f.nodes, nodes) and np.array_equal(f.values, vals)
    assert np.array_equal(f.errors, vals * 1e-3)


@pytest.mark.parametrize("mu", [
    AtomicMeasure([[0.0, 1.0], [2.0, 3.0]], [1.0, 0.5]),
    CellDensityMeasure([0.0, -1.0, 0.5], 0.25, (2, 3, 1), np.arange(6.0).reshape(2, 3, 1)),
], ids=["atoms", "cells"])
def test_measure_round_trip(tmp_path, mu):
    save_measure(tmp_path / "m.npz", mu)
    back = load_measure(tmp_path / "m.npz")
    assert type(back) is type(mu)
    if isinstance(mu, AtomicMeasure):
        assert np.array_equal(back.points, mu.points) and np.array_equal(back.masses, mu.masses)
    else:
        assert back.extents == mu.extents and back.cell_size == mu.cell_size
        assert np.array_equal(back.density, mu.density) and np.array_equal(back.origin, mu.origin)
