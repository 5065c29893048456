"""Correlation-bias metrics for two numerical columns.

Rows where either cell is missing are dropped pairwise. Discretization for
the information-theoretic metrics uses equal-frequency (quantile-edge)
bins, which keeps them invariant under monotone rescaling of the inputs.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConstantColumnError, InsufficientSamplesError
from ..tabular import Column
from .base import MetricOptions, MetricResult, Scenario


def _result(metric_id, raw, n, details=""):
    return MetricResult(metric_id, Scenario.NUM_NUM, raw, n, details)


def paired(x: Column, y: Column):
    xs, ys = [], []
    for a, b in zip(x.values, y.values):
        if a is None or b is None:
            continue
        xs.append(a)
        ys.append(b)
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def _checked(x: Column, y: Column, opts: MetricOptions, metric_id: str,
             need_variance: bool = True, min_n: int | None = None):
    xs, ys = paired(x, y)
    # Binning metrics need enough points to fill their bins; the moment
    # and rank based metrics only need a handful.
    need = max(8, opts.bins) if min_n is None else min_n
    if xs.size < need:
        raise InsufficientSamplesError(
            f"{metric_id} needs n >= {need}, got {xs.size}")
    if need_variance and (xs.std() == 0 or ys.std() == 0):
        raise ConstantColumnError(f"{metric_id} undefined for a constant column")
    return xs, ys


def pearson(x: Column, y: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    xs, ys = _checked(x, y, opts, "pearson", min_n=3)
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    r = float((dx * dy).sum() / math.sqrt((dx ** 2).sum() * (dy ** 2).sum()))
    return _result("pearson", {"r": max(-1.0, min(1.0, r))}, xs.size)


def _equal_frequency_bins(v: np.ndarray, bins: int) -> np.ndarray:
    """Bin indices from quantile edges; ties always share a bin."""
    edges = np.quantile(v, np.arange(1, bins) / bins)
    return np.searchsorted(edges, v, side="right")


def _joint_hist(bx: np.ndarray, by: np.ndarray, bins: int) -> np.ndarray:
    joint = np.zeros((bins, bins))
    np.add.at(joint, (bx, by), 1.0)
    return joint / bx.size


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def nmi(x: Column, y: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Normalized mutual information I / sqrt(H(X) H(Y)) over binned data."""
    xs, ys = _checked(x, y, opts, "nmi", need_variance=False)
    bx = _equal_frequency_bins(xs, opts.bins)
    by = _equal_frequency_bins(ys, opts.bins)
    joint = _joint_hist(bx, by, opts.bins)
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    hx, hy = _entropy(px), _entropy(py)
    mi = hx + hy - _entropy(joint.ravel())
    if hx == 0 or hy == 0:
        value = 0.0
    else:
        value = max(0.0, min(1.0, mi / math.sqrt(hx * hy)))
    return _result("nmi", {"nmi": value, "mi": max(0.0, mi)}, xs.size,
                   f"bins={opts.bins}")


def hgr_approximation(x: Column, y: Column,
                      opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Maximal-correlation estimate from the normalized joint distribution.

    The joint density is smoothed by a Gaussian KDE on a kde_grid lattice,
    aggregated into equal-probability bins, and normalized cell-wise as
    Q_ij = p_ij / sqrt(p_i. * p_.j); the estimate is the second-largest
    singular value of Q. The chi-square divergence sum(Q^2) - 1 is reported
    alongside.
    """
    xs, ys = _checked(x, y, opts, "hgr_approximation")
    density = _kde_lattice(xs, ys, opts.kde_grid)
    joint = _aggregate_lattice(density, opts.bins)
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    keep_r = px > 0
    keep_c = py > 0
    q = joint[np.ix_(keep_r, keep_c)] / np.sqrt(
        np.outer(px[keep_r], py[keep_c]))
    sv = np.linalg.svd(q, compute_uv=False)
    hgr = float(sv[1]) if sv.size > 1 else 0.0
    chi2 = float((q ** 2).sum() - 1.0)
    return _result("hgr_approximation",
                   {"hgr": max(0.0, min(1.0, hgr)), "chi2_divergence": max(0.0, chi2)},
                   xs.size, f"bins={opts.bins} grid={opts.kde_grid}")


def _kde_lattice(xs: np.ndarray, ys: np.ndarray, grid: int) -> np.ndarray:
    """Product-Gaussian KDE evaluated on a grid x grid lattice."""
    xs = (xs - xs.mean()) / xs.std()
    ys = (ys - ys.mean()) / ys.std()
    h = xs.size ** (-1.0 / 6.0)  # Scott's rule for d=2 on unit-sd data
    gx = np.linspace(xs.min() - 3 * h, xs.max() + 3 * h, grid)
    gy = np.linspace(ys.min() - 3 * h, ys.max() + 3 * h, grid)
    ax = np.exp(-0.5 * ((gx[:, None] - xs[None, :]) / h) ** 2)
    ay = np.exp(-0.5 * ((gy[:, None] - ys[None, :]) / h) ** 2)
    density = ax @ ay.T
    return density / density.sum()


def _aggregate_lattice(density: np.ndarray, bins: int) -> np.ndarray:
    """Group lattice cells into bins of roughly equal marginal probability."""
    def cuts(marginal):
        cum = np.cumsum(marginal)
        idx = np.searchsorted(cum, np.arange(1, bins) / bins * cum[-1])
        return np.unique(np.clip(idx + 1, 1, marginal.size - 1))

    rows = np.split(np.arange(density.shape[0]), cuts(density.sum(axis=1)))
    cols = np.split(np.arange(density.shape[1]), cuts(density.sum(axis=0)))
    out = np.zeros((len(rows), len(cols)))
    for i, ri in enumerate(rows):
        for j, cj in enumerate(cols):
            out[i, j] = density[np.ix_(ri, cj)].sum()
    return out


def wasserstein(x: Column, y: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """W2 distance between the standardized marginal distributions."""
    xs, ys = _checked(x, y, opts, "wasserstein", min_n=3)
    xs = np.sort((xs - xs.mean()) / xs.std())
    ys = np.sort((ys - ys.mean()) / ys.std())
    w2 = float(np.sqrt(np.mean((xs - ys) ** 2)))
    return _result("wasserstein", {"w2": w2}, xs.size)


def hsic(x: Column, y: Column, opts: MetricOptions = MetricOptions()) -> MetricResult:
    """Normalized HSIC with RBF kernels and median-heuristic bandwidths.

    nHSIC = HSIC(x, y) / sqrt(HSIC(x, x) * HSIC(y, y)). Inputs longer than
    ``hsic_max_n`` are deterministically subsampled (evenly spaced rows)
    before the O(n^2) Gram matrices are formed.
    """
    xs, ys = _checked(x, y, opts, "hsic", min_n=4)
    n_full = xs.size
    if n_full > opts.hsic_max_n:
        idx = np.linspace(0, n_full - 1, opts.hsic_max_n).astype(int)
        xs, ys = xs[idx], ys[idx]
    k = _rbf_gram(xs)
    l = _rbf_gram(ys)
    kc = _center(k)
    lc = _center(l)
    hxy = float((kc * lc).sum())
    hxx = float((kc * kc).sum())
    hyy = float((lc * lc).sum())
    n = xs.size
    norm = math.sqrt(hxx * hyy)
    nh = max(0.0, min(1.0, hxy / norm)) if norm > 0 else 0.0
    return _result("hsic",
                   {"hsic": hxy / (n - 1) ** 2, "nhsic": nh},
                   n_full,
                   f"gram_n={n}" + (" (subsampled)" if n < n_full else ""))


def _rbf_gram(v: np.ndarray) -> np.ndarray:
    d2 = (v[:, None] - v[None, :]) ** 2
    upper = d2[np.triu_indices_from(d2, k=1)]
    positive = upper[upper > 0]
    sigma2 = float(np.median(positive)) if positive.size else 1.0
    return np.exp(-d2 / (2.0 * sigma2))


def _center(k: np.ndarray) -> np.ndarray:
    row = k.mean(axis=0, keepdims=True)
    col = k.mean(axis=1, keepdims=True)
    return k - row - col + k.mean()


METRICS = {
    "pearson": pearson,
    "nmi": nmi,
    "hgr_approximation": hgr_approximation,
    "wasserstein": wasserstein,
    "hsic": hsic,
}
