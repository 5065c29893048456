"""Shared types for the detection metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import UnsupportedArityError
from ..tabular import Column, Kind


class Scenario(str, Enum):
    CAT_DIST = "cat_dist"
    NUM_DIST = "num_dist"
    CAT_CAT = "cat_cat"
    CAT_NUM = "cat_num"
    NUM_NUM = "num_num"


class BiasType(str, Enum):
    DISTRIBUTION = "distribution"
    CORRELATION = "correlation"
    UNSTATED = "unstated"


@dataclass(frozen=True)
class MetricOptions:
    bins: int = 10
    z_cutoff: float = 3.0
    kde_grid: int = 64
    mediator: Column | None = None
    covariate: Column | None = None
    seed: int = 0
    min_cell_support: int = 5
    # HSIC Gram matrices are O(n^2); larger inputs are deterministically
    # subsampled down to this many rows.
    hsic_max_n: int = 2048

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.kde_grid < 8:
            raise ValueError("kde_grid must be >= 8")


@dataclass(frozen=True)
class MetricResult:
    metric_id: str
    scenario: Scenario
    raw: dict
    n: int
    details: str = ""

    def to_record(self) -> dict:
        raw = {k: ("inf" if math.isinf(v) else v) for k, v in self.raw.items()}
        return {"metric_id": self.metric_id, "scenario": self.scenario.value,
                "raw": raw, "n": self.n, "details": self.details}


def classify_scenario(cols, stated_bias: BiasType = BiasType.UNSTATED) -> Scenario:
    """Map 1-2 typed columns (plus the stated bias type) to a scenario.

    An unstated ("implication") bias type resolves by column count: one
    column means distribution, two mean correlation. Column order is
    irrelevant for two-column scenarios.
    """
    if len(cols) == 1:
        col = cols[0]
        return Scenario.CAT_DIST if col.kind is Kind.CATEGORICAL else Scenario.NUM_DIST
    if len(cols) == 2:
        kinds = sorted(c.kind.value for c in cols)
        if kinds == ["categorical", "categorical"]:
            return Scenario.CAT_CAT
        if kinds == ["categorical", "numerical"]:
            return Scenario.CAT_NUM
        return Scenario.NUM_NUM
    raise UnsupportedArityError(f"expected 1 or 2 columns, got {len(cols)}")


def column_values(col: Column) -> np.ndarray:
    """Non-missing values of a numerical column as a float array."""
    return np.asarray(col.non_missing(), dtype=float)


def category_counts(col: Column) -> dict:
    """Counts of non-missing categories, keyed and ordered by label."""
    counts = {}
    for v in col.values:
        if v is None:
            continue
        counts[v] = counts.get(v, 0) + 1
    return {k: counts[k] for k in sorted(counts, key=str)}
