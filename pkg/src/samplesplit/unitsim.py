"""Synthetic unit-level A/B tests and random repartitioning.

Outcomes are Gaussian with per-unit variance ``tau_sq * n / 2`` so the
difference in means of a balanced test of ``n`` units per arm has variance
exactly ``tau_sq``.  Split sizes are fixed at ``round(alpha * n)`` per arm
(half to even); only membership is random.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EmptySplit,
    InvalidSize,
    SplitConfig,
    SplitPair,
    TestSummary,
    check_alpha,
    check_positive_variance,
)
from .rng import Domain, generator
from .sampler import split_variances

__all__ = [
    "UnitPanel",
    "simulate_units",
    "panel_for_summary",
    "split_size",
    "partition_and_estimate",
    "repartition_series",
]


@dataclass(frozen=True, eq=False)
class UnitPanel:
    treatment: np.ndarray
    control: np.ndarray
    parent_test_id: str = ""

    def __post_init__(self):
        if self.treatment.shape != self.control.shape or self.treatment.ndim != 1:
            raise InvalidSize("treatment and control must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.treatment)) and np.all(np.isfinite(self.control))):
            raise ValueError("unit outcomes must be finite")

    @property
    def n_per_arm(self) -> int:
        return self.treatment.shape[0]

    @property
    def n_treatment(self) -> int:
        return self.n_per_arm

    @property
    def n_control(self) -> int:
        return self.n_per_arm

    @property
    def delta_hat(self) -> float:
        return float(self.treatment.mean() - self.control.mean())

    def records(self):
        """Yield ``(unit_id, arm, outcome)``; treatment units come first."""
        n = self.n_per_arm
        for i, y in enumerate(self.treatment):
            yield i, "treatment", float(y)
        for i, y in enumerate(self.control):
            yield n + i, "control", float(y)

    def dump(self, path):
        """Write the panel as whitespace-separated text (debugging aid only)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("unit_id arm outcome\n")
            for uid, arm, y in self.records():
                fh.write(f"{uid} {arm} {y!r}\n")


def simulate_units(true_delta, tau_sq, n_per_arm, rng, test_id=""):
    """Simulate a balanced panel whose difference in means has variance ``tau_sq``."""
    check_positive_variance(tau_sq)
    if int(n_per_arm) != n_per_arm or n_per_arm < 2:
        raise InvalidSize(f"n_per_arm must be an integer >= 2, got {n_per_arm!r}")
    n = int(n_per_arm)
    sd = np.sqrt(tau_sq * n / 2.0)
    treatment = true_delta + sd * rng.standard_normal(n)
    control = sd * rng.standard_normal(n)
    return UnitPanel(treatment, control, str(test_id))


def panel_for_summary(test: TestSummary, n_per_arm, rng):
    """A synthetic panel whose difference in means reproduces ``test.delta_hat``.

    Outcomes are simulated around the estimate and the treatment arm is then
    shifted by a constant, which leaves within-arm dispersion untouched.
    """
    panel = simulate_units(test.delta_hat, test.tau_sq, n_per_arm, rng, test.test_id)
    shift = test.delta_hat - panel.delta_hat
    return UnitPanel(panel.treatment + shift, panel.control, test.test_id)


def split_size(n_per_arm, alpha):
    """Units per arm in split a; raises EmptySplit if either split is empty."""
    alpha = check_alpha(alpha)
    m = round(alpha * n_per_arm)
    if m < 1 or n_per_arm - m < 1:
        raise EmptySplit(f"alpha={alpha} leaves an empty split with {n_per_arm} units per arm")
    return m


def _membership(n, m, rng):
    return rng.choice(n, m, replace=False, shuffle=False)


def partition_and_estimate(panel: UnitPanel, alpha, parent_tau_sq, rng, partition_index=1,
                           return_members=False):
    """Randomly split each arm and re-estimate the impact on both halves.

    Split variances come from ``parent_tau_sq``; they are never re-estimated
    from the units.  With ``return_members`` the index arrays of split a in
    each arm are returned as well.
    """
    n = panel.n_per_arm
    m = split_size(n, alpha)
    tau_sq_a, tau_sq_b = split_variances(parent_tau_sq, alpha)
    idx_t = _membership(n, m, rng)
    idx_c = _membership(n, m, rng)
    sum_t_a = panel.treatment[idx_t].sum()
    sum_c_a = panel.control[idx_c].sum()
    sum_t_b = panel.treatment.sum() - sum_t_a
    sum_c_b = panel.control.sum() - sum_c_a
    pair = SplitPair(
        partition_index,
        float((sum_t_a - sum_c_a) / m),
        tau_sq_a,
        float((sum_t_b - sum_c_b) / (n - m)),
        tau_sq_b,
    )
    if return_members:
        return pair, idx_t, idx_c
    return pair


def repartition_series(panel: UnitPanel, config: SplitConfig, parent_tau_sq, test_index=0,
                       replication=0):
    """``S`` random partitions of the same panel.

    Partition ``s`` draws from stream ``(seed, replication, test_index, s)``.
    The pairs share the underlying units and are therefore dependent.
    """
    split_size(panel.n_per_arm, config.alpha)
    return [
        partition_and_estimate(
            panel,
            config.alpha,
            parent_tau_sq,
            generator(config.master_seed, Domain.UNIT_PARTITION, replication, test_index, s),
            partition_index=s + 1,
        )
        for s in range(config.num_partitions)
    ]
