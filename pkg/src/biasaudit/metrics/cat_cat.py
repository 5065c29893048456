"""Correlation-bias metrics for two categorical columns.

All metrics operate on the contingency table of paired non-missing rows;
the first column plays the group role, the second the outcome role where
the metric distinguishes them.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTableError
from ..tabular import Column
from .base import MetricOptions, MetricResult, Scenario


def _result(metric_id, raw, n, details=""):
    return MetricResult(metric_id, Scenario.CAT_CAT, raw, n, details)


def contingency(a: Column, b: Column):
    """Contingency counts with rows/columns ordered by label."""
    pairs = [(x, y) for x, y in zip(a.values, b.values)
             if x is not None and y is not None]
    rows = sorted({x for x, _ in pairs}, key=str)
    cols = sorted({y for _, y in pairs}, key=str)
    table = np.zeros((len(rows), len(cols)))
    ri = {r: i for i, r in enumerate(rows)}
    ci = {c: j for j, c in enumerate(cols)}
    for x, y in pairs:
        table[ri[x], ci[y]] += 1
    return table, rows, cols


def _checked(a: Column, b: Column, metric_id: str):
    table, rows, cols = contingency(a, b)
    if len(rows) < 2 or len(cols) < 2:
        raise DegenerateTableError(
            f"{metric_id} needs >= 2 categories in each column "
            f"(got {len(rows)} x {len(cols)})")
    return table, rows, cols


def cramers_v(a: Column, b: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Cramer's V from the chi-square statistic of the contingency table."""
    o, rows, cols = _checked(a, b, "cramers_v")
    n = o.sum()
    e = np.outer(o.sum(axis=1), o.sum(axis=0)) / n
    mask = e > 0
    chi2 = float(((o[mask] - e[mask]) ** 2 / e[mask]).sum())
    v = float(np.sqrt(chi2 / (n * (min(len(rows), len(cols)) - 1))))
    return _result("cramers_v", {"chi2": chi2, "v": min(v, 1.0)}, int(n),
                   f"{len(rows)}x{len(cols)} table")


def elift(a: Column, b: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Worst-case lift max(P(y|x)/P(y), P(y)/P(y|x)) over supported cells.

    Cells with joint count below ``min_cell_support`` are skipped to avoid
    ratio blow-ups on rare cells; if no cell qualifies, all non-empty cells
    are used instead (noted in the diagnostics).
    """
    o, rows, cols = _checked(a, b, "elift")
    n = o.sum()
    row_tot = o.sum(axis=1)
    col_tot = o.sum(axis=0)
    support = opts.min_cell_support
    fallback = False
    cells = [(i, j) for i in range(len(rows)) for j in range(len(cols))
             if o[i, j] >= support]
    if not cells:
        fallback = True
        cells = [(i, j) for i in range(len(rows)) for j in range(len(cols))
                 if o[i, j] > 0]
    worst = 1.0
    for i, j in cells:
        p_y_given_x = o[i, j] / row_tot[i]
        p_y = col_tot[j] / n
        lift = p_y_given_x / p_y
        worst = max(worst, lift, 1.0 / lift if lift > 0 else worst)
    details = "fallback: no cell met support" if fallback else f"support>={support}"
    return _result("elift", {"max_elift": float(worst)}, int(n), details)


def statistical_parity(a: Column, b: Column,
                       opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Max outcome-rate gap between group pairs, with a pooled z-score."""
    o, rows, cols = _checked(a, b, "statistical_parity")
    row_tot = o.sum(axis=1)
    max_delta = 0.0
    max_z = 0.0
    for j in range(len(cols)):
        for g in range(len(rows)):
            for h in range(g + 1, len(rows)):
                n_g, n_h = row_tot[g], row_tot[h]
                p_g = o[g, j] / n_g
                p_h = o[h, j] / n_h
                delta = abs(p_g - p_h)
                max_delta = max(max_delta, delta)
                pooled = (o[g, j] + o[h, j]) / (n_g + n_h)
                denom = pooled * (1 - pooled) * (1 / n_g + 1 / n_h)
                if denom > 0:
                    max_z = max(max_z, delta / np.sqrt(denom))
    return _result("statistical_parity",
                   {"max_delta": float(max_delta), "max_z": float(max_z)},
                   int(o.sum()))


def _tvd(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def lipschitz(a: Column, b: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Largest pairwise TVD between group-conditional outcome distributions.

    This is the Lipschitz constant of the group -> conditional-distribution
    map when any two distinct groups are at unit distance.
    """
    o, rows, cols = _checked(a, b, "lipschitz")
    cond = o / o.sum(axis=1, keepdims=True)
    worst = 0.0
    for g in range(len(rows)):
        for h in range(g + 1, len(rows)):
            worst = max(worst, _tvd(cond[g], cond[h]))
    return _result("lipschitz", {"lipschitz": worst}, int(o.sum()))


def total_variation(a: Column, b: Column,
                    opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Largest TVD between a group's outcome distribution and the overall one."""
    o, rows, cols = _checked(a, b, "total_variation")
    n = o.sum()
    overall = o.sum(axis=0) / n
    cond = o / o.sum(axis=1, keepdims=True)
    worst = max(_tvd(cond[g], overall) for g in range(len(rows)))
    return _result("total_variation", {"tvd": worst}, int(n))


METRICS = {
    "cramers_v": cramers_v,
    "elift": elift,
    "statistical_parity": statistical_parity,
    "lipschitz": lipschitz,
    "total_variation": total_variation,
}
