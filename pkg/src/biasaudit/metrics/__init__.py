"""The 25 bias-detection metrics, organized by scenario."""

from __future__ import annotations

from ..errors import UnknownMetricError
from ..tabular import Column, Kind
from . import cat_cat, cat_dist, cat_num, num_dist, num_num
from .base import (
    BiasType,
    MetricOptions,
    MetricResult,
    Scenario,
    classify_scenario,
)

SCENARIO_METRICS = {
    Scenario.CAT_DIST: tuple(cat_dist.METRICS),
    Scenario.NUM_DIST: tuple(num_dist.METRICS),
    Scenario.CAT_CAT: tuple(cat_cat.METRICS),
    Scenario.CAT_NUM: tuple(cat_num.METRICS),
    Scenario.NUM_NUM: tuple(num_num.METRICS),
}

ALL_METRIC_IDS = tuple(m for ids in SCENARIO_METRICS.values() for m in ids)

_DISPATCH = {
    Scenario.CAT_DIST: cat_dist.METRICS,
    Scenario.NUM_DIST: num_dist.METRICS,
    Scenario.CAT_CAT: cat_cat.METRICS,
    Scenario.CAT_NUM: cat_num.METRICS,
    Scenario.NUM_NUM: num_num.METRICS,
}


def scenario_of_metric(metric_id: str) -> Scenario:
    for scenario, ids in SCENARIO_METRICS.items():
        if metric_id in ids:
            return scenario
    raise UnknownMetricError(f"unknown metric {metric_id!r}")


def run_metric(metric_id: str, cols, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Evaluate one metric on 1 or 2 columns, ordering them as needed.

    Two-column scenarios accept the columns in either order: the
    categorical column is passed as the group for cat/num metrics.
    """
    scenario = scenario_of_metric(metric_id)
    fn = _DISPATCH[scenario][metric_id]
    if scenario in (Scenario.CAT_DIST, Scenario.NUM_DIST):
        if len(cols) != 1:
            raise UnknownMetricError(f"{metric_id} takes exactly 1 column")
        return fn(cols[0], opts)
    if len(cols) != 2:
        raise UnknownMetricError(f"{metric_id} takes exactly 2 columns")
    a, b = cols
    if scenario is Scenario.CAT_NUM and a.kind is not Kind.CATEGORICAL:
        a, b = b, a
    return fn(a, b, opts)


__all__ = [
    "ALL_METRIC_IDS",
    "BiasType",
    "MetricOptions",
    "MetricResult",
    "SCENARIO_METRICS",
    "Scenario",
    "cat_cat",
    "cat_dist",
    "cat_num",
    "classify_scenario",
    "num_dist",
    "num_num",
    "run_metric",
    "scenario_of_metric",
]
