"""Distribution-bias metrics for a single numerical column.

Moments are population moments about the mean; quantiles use linear
interpolation (numpy's default, type 7).
"""

from __future__ import annotations

import numpy as np

from ..errors import ConstantColumnError, DegenerateIQRError, InsufficientSamplesError
from ..tabular import Column
from .base import MetricOptions, MetricResult, Scenario, column_values


def _result(metric_id, raw, n, details=""):
    return MetricResult(metric_id, Scenario.NUM_DIST, raw, n, details)


def _values(col: Column, metric_id: str) -> np.ndarray:
    x = column_values(col)
    if x.size < 3:
        raise InsufficientSamplesError(f"{metric_id} needs n >= 3, got {x.size}")
    return x


def skewness(col: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    x = _values(col, "skewness")
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    if m2 == 0:
        raise ConstantColumnError("skewness undefined for a constant column")
    g1 = np.mean(d ** 3) / m2 ** 1.5
    return _result("skewness", {"g1": float(g1)}, x.size)


def kurtosis(col: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Excess kurtosis m4 / m2^2 - 3."""
    x = _values(col, "kurtosis")
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    if m2 == 0:
        raise ConstantColumnError("kurtosis undefined for a constant column")
    g2 = np.mean(d ** 4) / m2 ** 2 - 3.0
    return _result("kurtosis", {"g2": float(g2)}, x.size)


def outlier(col: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Fraction of points farther than ``z_cutoff`` population sd from the mean."""
    x = _values(col, "outlier")
    sd = x.std()
    if sd == 0:
        raise ConstantColumnError("outlier fraction undefined for a constant column")
    frac = float(np.mean(np.abs(x - x.mean()) / sd > opts.z_cutoff))
    return _result("outlier", {"fraction": frac}, x.size,
                   f"z_cutoff={opts.z_cutoff}")


def cohens_d_mad(col: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Mean-median gap scaled by 1.4826 * MAD (robust asymmetry measure)."""
    x = _values(col, "cohens_d_mad")
    med = float(np.median(x))
    mad = float(np.median(np.abs(x - med)))
    if mad == 0:
        raise ConstantColumnError("cohens_d_mad undefined: MAD is zero")
    d = (float(x.mean()) - med) / (1.4826 * mad)
    return _result("cohens_d_mad", {"d": d}, x.size)


def quantile_deviation(col: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """|QD - 0.5| where QD = (Q3 - Q2) / (Q3 - Q1)."""
    x = _values(col, "quantile_deviation")
    q1, q2, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    if q3 <= q1:
        raise DegenerateIQRError("quantile_deviation undefined: IQR is zero")
    qd = (q3 - q2) / (q3 - q1)
    return _result("quantile_deviation",
                   {"qd": float(qd), "deviation": float(abs(qd - 0.5))}, x.size)


METRICS = {
    "skewness": skewness,
    "kurtosis": kurtosis,
    "outlier": outlier,
    "cohens_d_mad": cohens_d_mad,
    "quantile_deviation": quantile_deviation,
}
