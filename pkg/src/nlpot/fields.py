"""Sampled fields: values on a finite node set with an optional decay model."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class TailModel:
    """``value ≈ C (1 + |x - center|)^(-delta)`` outside the sampled region."""

    C: float
    delta: float
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (self.C > 0 and np.isfinite(self.C)):
            raise ValueError("tail constant must be positive and finite")
        if not self.delta > 0:
            raise ValueError("tail exponent must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        c = 0.0 if self.center is None else self.center
        rho = np.sqrt(((x - c) ** 2).sum(-1))
        return self.C * (1.0 + rho) ** (-self.delta)


@dataclass(frozen=True)
class SampledField:
    nodes: np.ndarray
    values: np.ndarray
    tail: Optional[TailModel] = None
    errors: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if nodes.shape[0] != values.shape[0]:
            raise ValueError("node and value counts differ")
        if np.any(np.isnan(values)) or np.any(values < 0):
            raise ValueError("field values must be nonnegative")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if self.errors is not None:
            object.__setattr__(self, "errors", np.asarray(self.errors, dtype=float).reshape(-1))

    def __len__(self):
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def with_values(self, values, errors=None) -> "SampledField":
        return replace(self, values=values, errors=errors)

    def with_tail(self, tail: Optional[TailModel]) -> "SampledField":
        return replace(self, tail=tail)


def constant_field(nodes, value: float) -> SampledField:
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    return SampledField(nodes, np.full(nodes.shape[0], float(value)))
