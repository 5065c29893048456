"""Deterministic synthetic datasets with a single bias-strength knob.

Each scenario interpolates from its null (balanced / independent) at
strength 0 to a strongly biased construction at strength 1. Generation
uses numpy's PCG64 generator; the algorithm name and spec are recorded in
the table metadata so a table is reproducible from spec + seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError, MetricError
from .metrics import SCENARIO_METRICS, MetricOptions, Scenario, run_metric
from .severity import ThresholdTable, calibrate
from .tabular import Kind, Table, from_columns

# Geometric decay of category weights reaches 1 - _CAT_DECAY at full
# strength (cat_dist); the numeric-shape knob reaches _NUM_SHAPE at full
# strength (num_dist).
_CAT_DECAY = 0.7
_NUM_SHAPE = 1.1

# Strength assigned to each intended severity level in graded suites.
LEVEL_STRENGTHS = {1: 0.05, 2: 0.2, 3: 0.45, 4: 0.7, 5: 0.95}
GRADE_SIZES = (500, 5000, 20000)


@dataclass(frozen=True)
class SynthSpec:
    scenario: Scenario
    n: int
    strength: float
    k: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n < 10:
            raise InvalidSpecError(f"n must be >= 10, got {self.n}")
        if self.k < 2:
            raise InvalidSpecError(f"k must be >= 2, got {self.k}")
        if not 0.0 <= self.strength <= 1.0:
            raise InvalidSpecError(
                f"strength must be in [0, 1], got {self.strength}")

    def to_record(self) -> dict:
        return {"scenario": self.scenario.value, "n": self.n,
                "strength": self.strength, "k": self.k, "seed": self.seed,
                "rng": "pcg64"}


def generate(spec: SynthSpec) -> Table:
    rng = np.random.default_rng(spec.seed)
    builder = {
        Scenario.CAT_DIST: _gen_cat_dist,
        Scenario.NUM_DIST: _gen_num_dist,
        Scenario.CAT_CAT: _gen_cat_cat,
        Scenario.CAT_NUM: _gen_cat_num,
        Scenario.NUM_NUM: _gen_num_num,
    }[spec.scenario]
    cols = builder(spec, rng)
    name = (f"synth-{spec.scenario.value}-s{spec.strength}"
            f"-n{spec.n}-k{spec.k}-seed{spec.seed}")
    return from_columns(name, cols, meta=spec.to_record())


def _largest_remainder_counts(probs, n):
    """Integer counts summing to n that best match the target proportions."""
    raw = probs * n
    counts = np.floor(raw).astype(int)
    short = n - counts.sum()
    order = np.argsort(-(raw - counts))
    counts[order[:short]] += 1
    return counts


def _gen_cat_dist(spec, rng):
    # Category proportions decay geometrically with the strength knob.
    # Counts are stratified (largest-remainder rounding, then shuffled) so
    # the realized imbalance tracks the knob closely even at small n.
    g = 1.0 - _CAT_DECAY * spec.strength
    weights = np.array([g ** i for i in range(spec.k)])
    counts = _largest_remainder_counts(weights / weights.sum(), spec.n)
    values = [f"c{i}" for i, c in enumerate(counts) for _ in range(c)]
    rng.shuffle(values)
    return [("category", Kind.CATEGORICAL, values)]


def _gen_num_dist(spec, rng):
    # Shifted log-normal shape: x = (exp(d z) - 1) / d with z standard
    # normal, symmetric at d = 0 and increasingly right-skewed and
    # heavy-tailed as the strength knob rises. Stratified quantile sampling
    # (shuffled) keeps the realized shape close to the target at any n.
    from statistics import NormalDist
    d = _NUM_SHAPE * spec.strength
    inv = NormalDist().inv_cdf
    u = (np.arange(spec.n) + 0.5) / spec.n
    z = np.array([inv(p) for p in u])
    x = z if d < 1e-12 else (np.exp(d * z) - 1.0) / d
    # Plant a few explicit outliers at +-4 sd; the shape's own tail
    # fraction saturates at high strength, so without these the outlier
    # rate would not grow monotonically with the knob.
    planted = int(round(spec.n * 0.01 * spec.strength ** 2))
    if planted:
        amp = 4.0 * float(np.std(x))
        central = np.argsort(np.abs(x - np.median(x)))[:planted]
        x[central] = [amp if i % 2 == 0 else -amp for i in range(planted)]
    values = [float(v) for v in x]
    rng.shuffle(values)
    return [("value", Kind.NUMERICAL, values)]


def _gen_cat_cat(spec, rng):
    s = spec.strength
    k = spec.k
    probs = np.full((k, k), (1.0 - s) / (k * k))
    probs[np.diag_indices(k)] += s / k
    flat = probs.ravel()
    draws = rng.choice(k * k, size=spec.n, p=flat / flat.sum())
    return [
        ("group_a", Kind.CATEGORICAL, [f"a{i // k}" for i in draws]),
        ("group_b", Kind.CATEGORICAL, [f"b{i % k}" for i in draws]),
    ]


def _gen_cat_num(spec, rng):
    gap = 2.0 * spec.strength  # standardized mean gap d = 2s
    group = rng.integers(0, 2, size=spec.n)
    y = rng.standard_normal(spec.n) + gap * group
    return [
        ("group", Kind.CATEGORICAL, [f"g{i}" for i in group]),
        ("value", Kind.NUMERICAL, [float(v) for v in y]),
    ]


def _gen_num_num(spec, rng):
    rho = spec.strength
    x = rng.standard_normal(spec.n)
    eps = rng.standard_normal(spec.n)
    y = rho * x + math.sqrt(1.0 - rho * rho) * eps
    return [
        ("x", Kind.NUMERICAL, [float(v) for v in x]),
        ("y", Kind.NUMERICAL, [float(v) for v in y]),
    ]


def grade_suite(scenario: Scenario, levels, k: int = 4, base_seed: int = 7):
    """(spec, intended level) pairs: one spec per level per suite size."""
    suite = []
    for level in levels:
        strength = LEVEL_STRENGTHS[level]
        for i, n in enumerate(GRADE_SIZES):
            seed = base_seed + 1000 * level + i
            suite.append((SynthSpec(scenario=scenario, n=n, strength=strength,
                                    k=k, seed=seed), level))
    return suite


def collect_calibration_samples(suite, initial: ThresholdTable,
                                opts: MetricOptions = MetricOptions(),
                                metric_ids=None) -> dict:
    """Evaluate the scenario metrics over a graded suite.

    Returns metric_id -> {level: [transformed raw values]} suitable for
    :func:`biasaudit.severity.calibrate`. Metrics that error on every suite
    case (e.g. a mediation metric with no mediator column) are dropped.
    """
    samples: dict = {}
    for spec, level in suite:
        table = generate(spec)
        cols = table.columns
        ids = metric_ids or SCENARIO_METRICS[spec.scenario]
        for metric_id in ids:
            try:
                result = run_metric(metric_id, cols, opts)
            except MetricError:
                continue
            band = initial.band(metric_id)
            value = band.transformed(result.raw)
            samples.setdefault(metric_id, {}).setdefault(level, []).append(value)
    return samples


def calibrate_scenarios(scenarios, initial: ThresholdTable,
                        opts: MetricOptions = MetricOptions(),
                        k: int = 4, base_seed: int = 7,
                        version: str = "calibrated-v1"):
    """End-to-end calibration across graded suites for the given scenarios."""
    samples: dict = {}
    for scenario in scenarios:
        suite = grade_suite(scenario, levels=range(1, 6), k=k, base_seed=base_seed)
        samples.update(collect_calibration_samples(suite, initial, opts))
    return calibrate(samples, initial, version=version)
