"""Simulation study: replicated datasets, bias/variance/coverage, sweeps.

A replication draws a fresh set of tests from :class:`DgpParams`, scores
both methodologies of a pair on shared split draws and records the two
performance estimates, their intervals and the relative difference.

Every draw is keyed by ``(seed, replication, test, partition)`` and none by
the swept parameter, so sweep cells reuse the same underlying randomness:
a cell with ``I`` tests sees the first ``I`` tests of a larger cell, and
``S`` partitions are the first ``S`` of a larger ``S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import (
    DgpParams,
    InvalidSize,
    Measure,
    MethodologyKind,
    MethodologySpec,
    SplitConfig,
    TestSummary,
    check_alpha,
    validate_run_config,
)
from .estimators import (
    average_performance,
    confidence_interval,
    per_test_scores,
    performance_variance,
    relative_difference,
)
from .normal import Z975
from .oracles import (
    OracleInputs,
    performance_estimand,
    split_launch_relative,
    split_mse_relative,
    ideal_launch_relative,
    ideal_mse_relative,
)
from .parallel import ordered_map
from .rng import Domain, normals

__all__ = [
    "DgpParams",
    "BENCHMARK",
    "BENCHMARK_SPLIT",
    "mse_pair",
    "launch_pair",
    "generate_dataset",
    "dataset_arrays",
    "reference_estimands",
    "ReplicationMetrics",
    "run_replications",
    "AlphaSweep",
    "SizeSweep",
    "sweep_alpha",
    "sweep_size",
    "alpha_trend_checks",
    "variance_slope",
]

BENCHMARK = DgpParams(sigma_sq=1.0, tau_sq_base=2.0, heteroskedastic=True, num_tests=5000)
BENCHMARK_SPLIT = SplitConfig(alpha=0.5, num_partitions=30, master_seed=0)
DEFAULT_REPLICATIONS = 1000
DEFAULT_SWEEP_REPLICATIONS = 200
_REPLICATIONS_PER_JOB = 8


def mse_pair(sigma_sq=1.0):
    """Unbiased vs Bayes-shrinkage estimator, scored by squared error."""
    return (MethodologySpec.identity(), MethodologySpec.bayes_shrinkage(sigma_sq)), Measure.SQUARED_ERROR


def launch_pair(sigma_sq=1.0):
    """5% significance rule vs posterior-sign rule, scored by launch-only value."""
    return (
        (MethodologySpec.threshold_rule(Z975), MethodologySpec.bayes_sign_rule(sigma_sq)),
        Measure.LAUNCH_ONLY_DECISION_VALUE,
    )


def dataset_arrays(params: DgpParams, seed: int, replication: int = 0, num_tests: Optional[int] = None):
    """``(true_delta, tau_sq, delta_hat)`` arrays for one replication."""
    n = params.num_tests if num_tests is None else num_tests
    tests = np.arange(n, dtype=np.uint64)
    delta = math.sqrt(params.sigma_sq) * normals(seed, Domain.TRUE_EFFECT, replication, tests, 1)[:, 0]
    tau_sq = np.full(n, float(params.tau_sq_base))
    if params.heteroskedastic:
        eps = normals(seed, Domain.VARIANCE_NOISE, replication, tests, 1)[:, 0]
        tau_sq = tau_sq + eps * eps
    noise = normals(seed, Domain.ESTIMATE_NOISE, replication, tests, 1)[:, 0]
    delta_hat = delta + np.sqrt(tau_sq) * noise
    return delta, tau_sq, delta_hat


def generate_dataset(params: DgpParams, seed: int, replication: int = 0):
    """One simulated set of tests with ``true_delta`` filled in."""
    delta, tau_sq, delta_hat = dataset_arrays(params, seed, replication)
    return [
        TestSummary(f"sim-{i}", float(dh), float(ts), float(d))
        for i, (d, ts, dh) in enumerate(zip(delta, tau_sq, delta_hat))
    ]


def _canonical_pair(pair, measure, params):
    """Which closed form, if any, describes this pair under ``params``."""
    m1, m2 = pair
    if params.heteroskedastic or params.sigma_sq <= 0.0:
        return None
    if (measure is Measure.SQUARED_ERROR and m1.kind is MethodologyKind.IDENTITY
            and m2.kind is MethodologyKind.BAYES_SHRINKAGE and m2.param == params.sigma_sq):
        return "mse"
    if (measure is Measure.LAUNCH_ONLY_DECISION_VALUE and m1.kind is MethodologyKind.THRESHOLD_RULE
            and m2.kind is MethodologyKind.BAYES_SIGN_RULE and m2.param == params.sigma_sq):
        return "launch"
    return None


def reference_estimands(params: DgpParams, pair, measure: Measure, alpha: float):
    """Estimands the simulation is judged against.

    Returns ``dict(split_arms, split, ideal)``: per-methodology split
    estimands and the relative difference under split and full-sample
    training.  Closed forms are used for the canonical homoskedastic pairs,
    quadrature otherwise.
    """
    measure = Measure(measure)
    arms = tuple(performance_estimand(m, measure, params, alpha) for m in pair)
    canon = _canonical_pair(pair, measure, params)
    if canon is not None:
        inputs = OracleInputs(params.sigma_sq, params.tau_sq_base, alpha, launch_z=pair[0].param or Z975)
        if canon == "mse":
            split, ideal = split_mse_relative(inputs), ideal_mse_relative(inputs)
        else:
            split, ideal = split_launch_relative(inputs), ideal_launch_relative(inputs)
        return {"split_arms": arms, "split": split, "ideal": ideal}
    ideal_arms = tuple(performance_estimand(m, measure, params, None) for m in pair)
    return {
        "split_arms": arms,
        "split": _safe_ratio(arms),
        "ideal": _safe_ratio(ideal_arms),
    }


def _safe_ratio(arms):
    t1, t2 = arms
    return (t2 - t1) / t1 if t1 != 0.0 else math.nan


@dataclass(frozen=True, eq=False)
class ReplicationMetrics:
    """Per-replication estimates plus the references they are judged against.

    Arrays indexed ``[replication]`` or ``[replication, arm]``.
    """

    theta_hat: np.ndarray
    zeta_sq_hat: np.ndarray
    comparison: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    split_estimand_arms: tuple
    split_estimand: float
    ideal_estimand: float
    num_tests: int
    num_partitions: int
    alpha: float
    level: float

    @property
    def num_replications(self) -> int:
        return self.comparison.shape[0]

    @property
    def covered(self) -> np.ndarray:
        ref = np.asarray(self.split_estimand_arms)
        return (self.ci_low <= ref) & (ref <= self.ci_high)

    @property
    def coverage(self) -> np.ndarray:
        return self.covered.mean(axis=0)

    @property
    def mean_comparison(self) -> float:
        return float(self.comparison.mean())

    @property
    def variance(self) -> float:
        return float(self.comparison.var(ddof=1))

    @property
    def comparison_se(self) -> float:
        return math.sqrt(self.variance / self.num_replications)

    @property
    def bias_vs_split(self) -> float:
        return self.mean_comparison - self.split_estimand

    @property
    def bias_vs_ideal(self) -> float:
        return self.mean_comparison - self.ideal_estimand

    def summary(self) -> dict:
        cov = self.coverage
        return {
            "num_replications": self.num_replications,
            "num_tests": self.num_tests,
            "num_partitions": self.num_partitions,
            "alpha": self.alpha,
            "level": self.level,
            "mean_comparison": self.mean_comparison,
            "split_estimand": self.split_estimand,
            "ideal_estimand": self.ideal_estimand,
            "bias_vs_split": self.bias_vs_split,
            "bias_vs_ideal": self.bias_vs_ideal,
            "variance": self.variance,
            "comparison_se": self.comparison_se,
            "coverage_1": float(cov[0]),
            "coverage_2": float(cov[1]),
        }


def _replication_block(job):
    (params, pair, measure, alpha, num_partitions, seed, reps, num_tests, sampler, n_per_arm) = job
    out = []
    for rep in reps:
        _, tau_sq, delta_hat = dataset_arrays(params, seed, rep, num_tests)
        y1, y2 = per_test_scores(delta_hat, tau_sq, pair, measure, alpha, num_partitions, seed,
                                 replication=rep, sampler=sampler, n_per_arm=n_per_arm)
        row = []
        for y in (y1, y2):
            theta = average_performance(y)
            row.extend((theta, performance_variance(y, theta)))
        out.append(row)
    return out


def _simulate(params, pair, measure, alpha, num_partitions, seed, num_replications, num_tests,
              sampler, n_per_arm, workers):
    reps = list(range(num_replications))
    jobs = [
        (params, tuple(pair), measure, alpha, num_partitions, seed, reps[i:i + _REPLICATIONS_PER_JOB],
         num_tests, sampler, n_per_arm)
        for i in range(0, num_replications, _REPLICATIONS_PER_JOB)
    ]
    rows = [r for block in ordered_map(_replication_block, jobs, workers) for r in block]
    return np.array(rows, dtype=np.float64).reshape(num_replications, 4)


def run_replications(params: DgpParams, pair: Sequence[MethodologySpec], measure: Measure,
                     num_replications: int = DEFAULT_REPLICATIONS,
                     config: SplitConfig = BENCHMARK_SPLIT, sampler: str = "plugin",
                     level: float = 0.95, workers: int = 1, n_per_arm: int = 1000,
                     references: Optional[dict] = None) -> ReplicationMetrics:
    """Replicate the full pipeline ``num_replications`` times.

    Replication ``r`` depends only on ``(config.master_seed, r)``; results
    are identical for any ``workers``.
    """
    if num_replications < 2:
        raise InvalidSize(f"need at least 2 replications, got {num_replications}")
    m1, m2 = pair
    config, _, measure = validate_run_config(config, m1, measure)
    validate_run_config(config, m2, measure)
    if references is None:
        references = reference_estimands(params, pair, measure, config.alpha)
    raw = _simulate(params, pair, measure, config.alpha, config.num_partitions, config.master_seed,
                    num_replications, params.num_tests, sampler, n_per_arm, workers)
    theta = raw[:, [0, 2]]
    zeta_sq = raw[:, [1, 3]]
    comparison = np.array([relative_difference(t1, t2) for t1, t2 in theta])
    low = np.empty_like(theta)
    high = np.empty_like(theta)
    for r in range(num_replications):
        for k in range(2):
            low[r, k], high[r, k] = confidence_interval(theta[r, k], zeta_sq[r, k], params.num_tests, level)
    return ReplicationMetrics(
        theta_hat=theta,
        zeta_sq_hat=zeta_sq,
        comparison=comparison,
        ci_low=low,
        ci_high=high,
        split_estimand_arms=tuple(references["split_arms"]),
        split_estimand=float(references["split"]),
        ideal_estimand=float(references["ideal"]),
        num_tests=params.num_tests,
        num_partitions=config.num_partitions,
        alpha=config.alpha,
        level=level,
    )


@dataclass(frozen=True, eq=False)
class AlphaSweep:
    rows: list  # (alpha, bias_sq_vs_ideal, variance, mse)
    metrics: list = field(repr=False)

    columns = ("alpha", "bias_sq_vs_ideal", "variance", "mse")


@dataclass(frozen=True, eq=False)
class SizeSweep:
    rows: list  # (num_tests, num_partitions, variance)
    metrics: list = field(repr=False)

    columns = ("num_tests", "num_partitions", "variance")


def sweep_alpha(params: DgpParams, pair, measure: Measure, alpha_grid: Sequence[float],
                num_replications: int = DEFAULT_SWEEP_REPLICATIONS,
                config: SplitConfig = BENCHMARK_SPLIT, level: float = 0.95, workers: int = 1,
                sampler: str = "plugin") -> AlphaSweep:
    """Squared bias against the ideal estimand, variance and MSE per ``alpha``."""
    if not len(alpha_grid):
        raise InvalidSize("alpha grid is empty")
    rows, metrics = [], []
    for alpha in alpha_grid:
        check_alpha(alpha)
        m = run_replications(params, pair, measure, num_replications, replace(config, alpha=float(alpha)),
                             sampler=sampler, level=level, workers=workers)
        bias_sq = m.bias_vs_ideal ** 2
        rows.append((float(alpha), bias_sq, m.variance, bias_sq + m.variance))
        metrics.append(m)
    return AlphaSweep(rows, metrics)


def sweep_size(params: DgpParams, pair, measure: Measure, num_tests_grid: Sequence[int],
               partitions_grid: Sequence[int], num_replications: int = DEFAULT_SWEEP_REPLICATIONS,
               config: SplitConfig = BENCHMARK_SPLIT, level: float = 0.95, workers: int = 1,
               sampler: str = "plugin") -> SizeSweep:
    """Variance of the relative difference for each ``(I, S)`` cell."""
    if not len(num_tests_grid) or not len(partitions_grid):
        raise InvalidSize("size grids must be non-empty")
    references = reference_estimands(params, pair, Measure(measure), config.alpha)
    rows, metrics = [], []
    for n_tests in num_tests_grid:
        for n_parts in partitions_grid:
            m = run_replications(replace(params, num_tests=int(n_tests)), pair, measure, num_replications,
                                 replace(config, num_partitions=int(n_parts)), sampler=sampler,
                                 level=level, workers=workers, references=references)
            rows.append((int(n_tests), int(n_parts), m.variance))
            metrics.append(m)
    return SizeSweep(rows, metrics)


def _influence(m: ReplicationMetrics, stat: str) -> np.ndarray:
    """Per-replication influence values of a sweep statistic."""
    c = m.comparison
    dev = c - c.mean()
    if stat == "bias_sq_vs_ideal":
        return 2.0 * (c.mean() - m.ideal_estimand) * dev
    if stat == "variance":
        return dev * dev - m.variance
    raise ValueError(f"unknown statistic {stat!r}")


def alpha_trend_checks(sweep: AlphaSweep):
    """Neighbouring-cell monotonicity checks for an alpha sweep.

    Squared bias against the ideal estimand should not increase with alpha
    and the variance should not decrease.  For each adjacent pair of grid
    points this returns the change, its standard error and ``violation_se``,
    the change in the disallowed direction measured in standard errors
    (negative when the trend goes the expected way).  Cells share their
    underlying draws, so the standard error is taken from paired
    per-replication influence values.
    """
    out = []
    for stat, sign in (("bias_sq_vs_ideal", 1.0), ("variance", -1.0)):
        col = AlphaSweep.columns.index(stat)
        for k in range(len(sweep.rows) - 1):
            lo, hi = sweep.metrics[k], sweep.metrics[k + 1]
            if lo.num_replications != hi.num_replications:
                raise InvalidSize("paired checks need equal replication counts")
            diff = sweep.rows[k + 1][col] - sweep.rows[k][col]
            paired = _influence(hi, stat) - _influence(lo, stat)
            se = float(paired.std(ddof=1) / math.sqrt(lo.num_replications))
            out.append({
                "statistic": stat,
                "alpha_low": sweep.rows[k][0],
                "alpha_high": sweep.rows[k + 1][0],
                "change": diff,
                "se": se,
                "violation_se": sign * diff / se if se > 0 else (math.inf if sign * diff > 0 else -math.inf),
            })
    return out


def variance_slope(sweep: SizeSweep, num_partitions: int) -> float:
    """Least-squares slope of log(variance) on log(I) at fixed ``S``."""
    pts = [(n, v) for n, s, v in sweep.rows if s == num_partitions]
    if len(pts) < 2:
        raise InvalidSize(f"need at least two I values at S={num_partitions}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])
