"""Every metric agrees with its from-definition reference on random small inputs."""

import math
import random

import pytest

import oracles
from biasaudit.errors import MetricError
from biasaudit.metrics import ALL_METRIC_IDS, MetricOptions, run_metric
from biasaudit.tabular import Column, Kind

TOL = 1e-9
INSTANCES = 20

# Small-instance options: few bins and a coarse KDE grid so that even
# n <= 12 inputs exercise the full code paths.
OPTS = MetricOptions(bins=3, kde_grid=8)


def cat_col(name, values):
    return Column(name, Kind.CATEGORICAL, tuple(values))


def num_col(name, values):
    return Column(name, Kind.NUMERICAL, tuple(float(v) for v in values))


def random_cat(rng, n, k):
    return [f"c{rng.randrange(k)}" for _ in range(n)]


def random_num(rng, n):
    return [round(rng.uniform(-5, 5), 3) for _ in range(n)]


def gen_instance(metric_id, rng):
    """One random small instance (columns, oracle args) for a metric."""
    n = rng.randint(8, 12)
    k = rng.randint(2, 3)
    if metric_id in ("shannon_balance", "entropy", "gini", "relative_risk",
                     "max_min_ratio"):
        vals = random_cat(rng, n, k)
        return [cat_col("c", vals)], (vals,), {}
    if metric_id in ("skewness", "kurtosis", "outlier", "cohens_d_mad",
                     "quantile_deviation"):
        vals = random_num(rng, n)
        return [num_col("x", vals)], (vals,), {}
    if metric_id in ("cramers_v", "elift", "statistical_parity", "lipschitz",
                     "total_variation"):
        a = random_cat(rng, n, k)
        b = [f"o{rng.randrange(k)}" for _ in range(n)]
        return [cat_col("a", a), cat_col("b", b)], (a, b), {}
    if metric_id in ("max_abs_mean", "cohens_d", "standardized_difference",
                     "causal_effect", "pse"):
        g = random_cat(rng, n, k)
        y = random_num(rng, n)
        cols = [cat_col("g", g), num_col("y", y)]
        if metric_id == "pse":
            m = random_num(rng, n)
            return cols, (g, y, m), {"mediator": num_col("m", m)}
        return cols, (g, y), {}
    # num_num
    x = random_num(rng, n)
    y = random_num(rng, n)
    return [num_col("x", x), num_col("y", y)], (x, y), {}


ORACLES = {
    "shannon_balance": oracles.shannon_balance,
    "max_min_ratio": oracles.max_min_ratio,
    "entropy": oracles.entropy,
    "gini": oracles.gini,
    "relative_risk": oracles.relative_risk,
    "skewness": oracles.skewness,
    "kurtosis": oracles.kurtosis,
    "outlier": oracles.outlier,
    "cohens_d_mad": oracles.cohens_d_mad,
    "quantile_deviation": oracles.quantile_deviation,
    "cramers_v": oracles.cramers_v,
    "elift": oracles.elift,
    "statistical_parity": oracles.statistical_parity,
    "lipschitz": oracles.lipschitz,
    "total_variation": oracles.total_variation,
    "max_abs_mean": oracles.max_abs_mean,
    "cohens_d": oracles.cohens_d,
    "standardized_difference": oracles.standardized_difference,
    "causal_effect": oracles.causal_effect,
    "pse": oracles.pse,
    "pearson": oracles.pearson,
    "nmi": lambda x, y: oracles.nmi(x, y, bins=OPTS.bins),
    "hgr_approximation": lambda x, y: oracles.hgr_approximation(
        x, y, bins=OPTS.bins, kde_grid=OPTS.kde_grid),
    "wasserstein": oracles.wasserstein,
    "hsic": oracles.hsic,
}


@pytest.mark.parametrize("metric_id", ALL_METRIC_IDS)
def test_metric_matches_oracle(metric_id):
    rng = random.Random(hash(metric_id) % (2 ** 31))
    checked = 0
    attempts = 0
    while checked < INSTANCES:
        attempts += 1
        assert attempts < 500, f"could not build {INSTANCES} valid instances"
        cols, args, extra = gen_instance(metric_id, rng)
        opts = OPTS if not extra else MetricOptions(
            bins=OPTS.bins, kde_grid=OPTS.kde_grid, **extra)
        try:
            result = run_metric(metric_id, cols, opts)
        except MetricError:
            continue  # degenerate draw; try another
        expected = ORACLES[metric_id](*args)
        for key, want in expected.items():
            got = result.raw[key]
            if math.isinf(want):
                assert math.isinf(got), f"{metric_id}.{key}"
            else:
                assert got == pytest.approx(want, abs=TOL), f"{metric_id}.{key}"
        checked += 1


def test_all_metrics_covered():
    assert set(ORACLES) == set(ALL_METRIC_IDS)
    assert len(ALL_METRIC_IDS) == 25
