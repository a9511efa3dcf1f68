"""Split data for plug-in methodologies without unit-level partitioning.

Given a test's full-sample estimate and variance, the training and
evaluation estimates of a random ``alpha`` split are jointly normal with a
rank-one covariance.  We draw the training estimate from its marginal and
recover the evaluation estimate from the exact identity
``alpha * a + (1 - alpha) * b == delta_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SplitConfig, SplitPair, TestSummary, check_alpha, check_positive_variance
from .rng import Domain, normals

__all__ = [
    "ConditionalSplitLaw",
    "conditional_law",
    "split_variances",
    "split_arrays",
    "draw_split_pairs",
]


@dataclass(frozen=True)
class ConditionalSplitLaw:
    mean_a: float
    mean_b: float
    var_a: float
    var_b: float
    cov_ab: float

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.var_a, self.cov_ab], [self.cov_ab, self.var_b]])


def split_variances(tau_sq, alpha):
    """Sampling variances of the training and evaluation estimates."""
    alpha = check_alpha(alpha)
    if np.ndim(tau_sq) == 0:
        check_positive_variance(tau_sq)
    return tau_sq / alpha, tau_sq / (1.0 - alpha)


def conditional_law(test: TestSummary, alpha: float) -> ConditionalSplitLaw:
    alpha = check_alpha(alpha)
    tau_sq = test.tau_sq
    return ConditionalSplitLaw(
        mean_a=test.delta_hat,
        mean_b=test.delta_hat,
        var_a=tau_sq / alpha - tau_sq,
        var_b=tau_sq / (1.0 - alpha) - tau_sq,
        cov_ab=-tau_sq,
    )


def split_arrays(delta_hat, tau_sq, alpha, z):
    """Vectorised split draws from standard normals ``z``.

    ``delta_hat`` and ``tau_sq`` have shape ``(I,)`` and ``z`` shape
    ``(I, S)``.  Returns ``(delta_hat_a, delta_hat_b)`` of shape ``(I, S)``.
    """
    delta_hat = np.asarray(delta_hat, dtype=np.float64)[:, None]
    tau_sq = np.asarray(tau_sq, dtype=np.float64)[:, None]
    sd_a = np.sqrt(tau_sq * (1.0 - alpha) / alpha)
    delta_hat_a = delta_hat + sd_a * z
    delta_hat_b = (delta_hat - alpha * delta_hat_a) / (1.0 - alpha)
    return delta_hat_a, delta_hat_b


def draw_split_pairs(test: TestSummary, config: SplitConfig, test_index=0, replication=0):
    """``config.num_partitions`` independent split pairs for one test.

    Draws come from the stream ``(config.master_seed, test_index,
    replication)``; the same indices always give the same pairs.
    """
    alpha = check_alpha(config.alpha)
    z = normals(config.master_seed, Domain.SPLIT, replication, [test_index], config.num_partitions)
    a, b = split_arrays([test.delta_hat], [test.tau_sq], alpha, z)
    tau_sq_a, tau_sq_b = split_variances(test.tau_sq, alpha)
    return [
        SplitPair(s + 1, float(a[0, s]), tau_sq_a, float(b[0, s]), tau_sq_b)
        for s in range(config.num_partitions)
    ]
