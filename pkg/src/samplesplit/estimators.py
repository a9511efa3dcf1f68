"""Per-partition scores, per-test averages and the aggregate estimators.

Scores are unbiased for the expected performance of a methodology run on
the training split, using the evaluation split as a proxy for the true
impact:

    bias                        kappa - b
    squared_error               (kappa - b)**2 - tau_sq_b
    decision_value              kappa * b - (1 - kappa) * b
    launch_only_decision_value  kappa * b

Averages over partitions, then over tests, give ``theta_hat``; the spread
of the per-test averages gives ``zeta_sq_hat`` and a normal interval.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DegenerateBaseline,
    EmptyInput,
    IncompatibleMeasure,
    InsufficientTests,
    InvalidLevel,
    Measure,
    MethodologySpec,
    SplitConfig,
    SplitPair,
    TestSummary,
    validate_run_config,
)
from .methodologies import MethodologyOutput, kappa
from .normal import norm_ppf
from .parallel import ordered_map
from .rng import Domain, generator, normals
from .sampler import split_arrays, split_variances
from .unitsim import panel_for_summary, repartition_series

__all__ = [
    "ScorePanel",
    "PerformanceReport",
    "ComparisonReport",
    "SmallSampleWarning",
    "partition_score",
    "score_arrays",
    "per_test_average",
    "average_performance",
    "performance_variance",
    "confidence_interval",
    "relative_difference",
    "per_test_scores",
    "score_panel",
    "evaluate",
    "compare",
]

SAMPLERS = ("plugin", "unit_level")
DEFAULT_N_PER_ARM = 1000
SMALL_SAMPLE_TESTS = 500
CHUNK_CELLS = 2_000_000


class SmallSampleWarning(UserWarning):
    """Asymptotic intervals may be unreliable with few tests."""


@dataclass(frozen=True, eq=False)
class ScorePanel:
    test_ids: tuple
    scores: np.ndarray  # (I, S)
    per_test: np.ndarray  # (I,)
    alpha: float
    measure: Measure
    methodology: MethodologySpec

    @property
    def num_partitions(self) -> int:
        return self.scores.shape[1]


@dataclass(frozen=True)
class PerformanceReport:
    theta_hat: float
    zeta_sq_hat: float
    ci_low: float
    ci_high: float
    level: float
    num_tests: int
    alpha: float
    num_partitions: int
    measure: str
    methodology: str


@dataclass(frozen=True)
class ComparisonReport:
    theta_hat_1: float
    theta_hat_2: float
    relative_difference: float
    report_1: PerformanceReport
    report_2: PerformanceReport


def partition_score(measure: Measure, kappa_out: MethodologyOutput, pair: SplitPair) -> float:
    measure = Measure(measure)
    if measure.output_class is not kappa_out.output_class:
        raise IncompatibleMeasure(
            f"{measure.value} cannot score an output of class {kappa_out.output_class.value}"
        )
    return float(score_arrays(measure, kappa_out.value, pair.delta_hat_b, pair.tau_sq_b))


def score_arrays(measure: Measure, k, delta_hat_b, tau_sq_b):
    """Vectorised partition scores; ``tau_sq_b`` broadcasts against ``k``."""
    if measure is Measure.BIAS:
        return k - delta_hat_b
    if measure is Measure.SQUARED_ERROR:
        err = k - delta_hat_b
        return err * err - tau_sq_b
    if measure is Measure.DECISION_VALUE:
        return k * delta_hat_b - (1.0 - k) * delta_hat_b
    if measure is Measure.LAUNCH_ONLY_DECISION_VALUE:
        return k * delta_hat_b
    raise IncompatibleMeasure(f"unknown measure {measure!r}")


def per_test_average(scores):
    """Mean over partitions.  A 2-d array is averaged row by row."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0 or arr.shape[-1] == 0:
        raise EmptyInput("no partition scores to average")
    out = arr.sum(axis=-1) / arr.shape[-1]
    return float(out) if out.ndim == 0 else out


def average_performance(per_test) -> float:
    arr = np.asarray(per_test, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("no tests to average")
    return float(arr.sum() / arr.size)


def performance_variance(per_test, theta_hat: float) -> float:
    """Plug-in variance with the 1/I normalisation (no Bessel correction)."""
    arr = np.asarray(per_test, dtype=np.float64)
    if arr.size < 2:
        raise InsufficientTests(f"need at least 2 tests, got {arr.size}")
    dev = arr - theta_hat
    return float((dev * dev).sum() / arr.size)


def confidence_interval(theta_hat: float, zeta_sq_hat: float, num_tests: int, level: float = 0.95):
    if not 0.0 < level < 1.0:
        raise InvalidLevel(f"level must lie in (0, 1), got {level!r}")
    if num_tests < 1:
        raise InsufficientTests(f"need at least 1 test, got {num_tests}")
    if zeta_sq_hat < 0.0:
        raise ValueError(f"zeta_sq_hat must be non-negative, got {zeta_sq_hat}")
    half = math.sqrt(zeta_sq_hat / num_tests) * norm_ppf(1.0 - (1.0 - level) / 2.0)
    return theta_hat - half, theta_hat + half


def relative_difference(theta_hat_1: float, theta_hat_2: float, denom_tolerance: float = 1e-9) -> float:
    if not abs(theta_hat_1) > denom_tolerance:
        raise DegenerateBaseline(
            f"baseline performance {theta_hat_1!r} is within {denom_tolerance} of zero; "
            "the relative difference is ill-posed"
        )
    return (theta_hat_2 - theta_hat_1) / theta_hat_1


def _plugin_chunk(job):
    (delta_hat, tau_sq, test_index, methodologies, measure, alpha, num_partitions, seed,
     replication, keep_scores) = job
    z = normals(seed, Domain.SPLIT, replication, test_index, num_partitions)
    a, b = split_arrays(delta_hat, tau_sq, alpha, z)
    del z
    tau_sq_a, tau_sq_b = split_variances(tau_sq, alpha)
    tau_sq_a = tau_sq_a[:, None]
    tau_sq_b = tau_sq_b[:, None]
    out = []
    for spec in methodologies:
        scores = score_arrays(measure, kappa(spec, a, tau_sq_a), b, tau_sq_b)
        out.append(scores if keep_scores else per_test_average(scores))
    return out


def _unit_chunk(job):
    (delta_hat, tau_sq, test_index, methodologies, measure, alpha, num_partitions, seed,
     replication, keep_scores, n_per_arm) = job
    config = SplitConfig(alpha, num_partitions, seed)
    a = np.empty((len(delta_hat), num_partitions))
    b = np.empty_like(a)
    for row, (dh, ts, t) in enumerate(zip(delta_hat, tau_sq, test_index)):
        summary = TestSummary(str(t), float(dh), float(ts))
        rng = generator(seed, Domain.UNIT_OUTCOME, replication, int(t))
        panel = panel_for_summary(summary, n_per_arm, rng)
        pairs = repartition_series(panel, config, float(ts), test_index=int(t), replication=replication)
        a[row] = [p.delta_hat_a for p in pairs]
        b[row] = [p.delta_hat_b for p in pairs]
    tau_sq_a, tau_sq_b = split_variances(np.asarray(tau_sq), alpha)
    out = []
    for spec in methodologies:
        scores = score_arrays(measure, kappa(spec, a, tau_sq_a[:, None]), b, tau_sq_b[:, None])
        out.append(scores if keep_scores else per_test_average(scores))
    return out


def per_test_scores(delta_hat, tau_sq, methodologies: Sequence[MethodologySpec], measure: Measure,
                    alpha: float, num_partitions: int, seed: int, replication: int = 0,
                    test_index=None, sampler: str = "plugin", keep_scores: bool = False,
                    n_per_arm: int = DEFAULT_N_PER_ARM, workers: int = 1):
    """Per-test average scores for several methodologies on shared split draws.

    Returns a list with one ``(I,)`` array per methodology (or ``(I, S)``
    partition scores with ``keep_scores``).  Test ``i`` uses the random
    stream of ``test_index[i]`` (default ``i``), so results do not depend on
    chunking or on the number of workers.
    """
    delta_hat = np.asarray(delta_hat, dtype=np.float64)
    tau_sq = np.asarray(tau_sq, dtype=np.float64)
    if test_index is None:
        test_index = np.arange(delta_hat.shape[0], dtype=np.uint64)
    test_index = np.asarray(test_index, dtype=np.uint64)
    if sampler not in SAMPLERS:
        raise ValueError(f"sampler must be one of {SAMPLERS}, got {sampler!r}")
    n = delta_hat.shape[0]
    rows = max(1, CHUNK_CELLS // max(1, num_partitions))
    if workers > 1:
        rows = min(rows, max(1, -(-n // workers)))
    methodologies = tuple(methodologies)
    jobs = []
    for lo in range(0, n, rows):
        sl = slice(lo, min(n, lo + rows))
        job = (delta_hat[sl], tau_sq[sl], test_index[sl], methodologies, measure, alpha,
               num_partitions, seed, replication, keep_scores)
        jobs.append(job if sampler == "plugin" else job + (n_per_arm,))
    fn = _plugin_chunk if sampler == "plugin" else _unit_chunk
    parts = ordered_map(fn, jobs, workers)
    return [np.concatenate([p[k] for p in parts]) for k in range(len(methodologies))]


def _summaries_to_arrays(tests):
    tests = list(tests)
    if len(tests) < 2:
        raise InsufficientTests(f"need at least 2 tests, got {len(tests)}")
    if len(tests) < SMALL_SAMPLE_TESTS:
        warnings.warn(
            f"only {len(tests)} tests; asymptotic intervals may be unreliable",
            SmallSampleWarning,
            stacklevel=3,
        )
    delta_hat = np.array([t.delta_hat for t in tests], dtype=np.float64)
    tau_sq = np.array([t.tau_sq for t in tests], dtype=np.float64)
    return tests, delta_hat, tau_sq


def _report(per_test, spec, measure, config, level):
    theta = average_performance(per_test)
    zeta_sq = performance_variance(per_test, theta)
    low, high = confidence_interval(theta, zeta_sq, per_test.size, level)
    return PerformanceReport(
        theta_hat=theta,
        zeta_sq_hat=zeta_sq,
        ci_low=low,
        ci_high=high,
        level=float(level),
        num_tests=int(per_test.size),
        alpha=float(config.alpha),
        num_partitions=int(config.num_partitions),
        measure=Measure(measure).value,
        methodology=spec.label,
    )


def score_panel(tests, methodology: MethodologySpec, measure: Measure, config: SplitConfig,
                sampler: str = "plugin", n_per_arm: int = DEFAULT_N_PER_ARM) -> ScorePanel:
    """Partition-level scores for inspection; :func:`evaluate` summarises them."""
    config, methodology, measure = validate_run_config(config, methodology, measure)
    tests, delta_hat, tau_sq = _summaries_to_arrays(tests)
    (scores,) = per_test_scores(delta_hat, tau_sq, [methodology], measure, config.alpha,
                                config.num_partitions, config.master_seed, sampler=sampler,
                                keep_scores=True, n_per_arm=n_per_arm)
    return ScorePanel(tuple(t.test_id for t in tests), scores, per_test_average(scores),
                      config.alpha, measure, methodology)


def evaluate(tests, methodology: MethodologySpec, measure: Measure, config: SplitConfig,
             sampler: str = "plugin", level: float = 0.95, n_per_arm: int = DEFAULT_N_PER_ARM,
             workers: int = 1) -> PerformanceReport:
    """Estimate a methodology's average split-sample performance with a CI."""
    config, methodology, measure = validate_run_config(config, methodology, measure)
    tests, delta_hat, tau_sq = _summaries_to_arrays(tests)
    (per_test,) = per_test_scores(delta_hat, tau_sq, [methodology], measure, config.alpha,
                                  config.num_partitions, config.master_seed, sampler=sampler,
                                  n_per_arm=n_per_arm, workers=workers)
    return _report(per_test, methodology, measure, config, level)


def compare(tests, methodology_1: MethodologySpec, methodology_2: MethodologySpec, measure: Measure,
            config: SplitConfig, sampler: str = "plugin", level: float = 0.95,
            n_per_arm: int = DEFAULT_N_PER_ARM, workers: int = 1,
            denom_tolerance: float = 1e-9) -> ComparisonReport:
    """Relative difference in performance of ``methodology_2`` over ``methodology_1``.

    Both methodologies are scored on the same split draws.
    """
    config, methodology_1, measure = validate_run_config(config, methodology_1, measure)
    validate_run_config(config, methodology_2, measure)
    tests, delta_hat, tau_sq = _summaries_to_arrays(tests)
    y1, y2 = per_test_scores(delta_hat, tau_sq, [methodology_1, methodology_2], measure,
                             config.alpha, config.num_partitions, config.master_seed,
                             sampler=sampler, n_per_arm=n_per_arm, workers=workers)
    r1 = _report(y1, methodology_1, measure, config, level)
    r2 = _report(y2, methodology_2, measure, config, level)
    rel = relative_difference(r1.theta_hat, r2.theta_hat, denom_tolerance)
    return ComparisonReport(r1.theta_hat, r2.theta_hat, rel, r1, r2)
