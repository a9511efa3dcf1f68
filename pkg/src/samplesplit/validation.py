"""Moment checks of split draws against their conditional normal law.

Two routes produce split pairs for a test: the plug-in sampler and actual
repartitioning of unit-level data.  Both are compared with
:func:`~samplesplit.sampler.conditional_law` on means, variances and the
covariance, each within ``z_max`` standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SplitConfig, TestSummary
from .rng import Domain, generator
from .sampler import conditional_law, draw_split_pairs
from .unitsim import repartition_series, simulate_units

__all__ = ["MomentCheck", "moment_checks", "plugin_suite", "unit_level_suite", "validate_sampler"]


@dataclass(frozen=True)
class MomentCheck:
    name: str
    observed: float
    expected: float
    se: float
    z_max: float = 3.0

    @property
    def z(self) -> float:
        if self.se == 0.0:
            return 0.0 if self.observed == self.expected else math.inf
        return (self.observed - self.expected) / self.se

    @property
    def passed(self) -> bool:
        return abs(self.z) <= self.z_max

    def as_dict(self):
        return {
            "name": self.name,
            "observed": self.observed,
            "expected": self.expected,
            "se": self.se,
            "z": self.z,
            "passed": self.passed,
        }


def moment_checks(a, b, law, prefix="", extra_rel_se=0.0, z_max=3.0):
    """Compare sample moments of ``(a, b)`` with ``law``.

    ``extra_rel_se`` adds a relative standard error to the second moments,
    for reference laws that are themselves only known up to sampling noise.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.size
    da = a - a.mean()
    db = b - b.mean()
    var_a = float(da @ da / (n - 1))
    var_b = float(db @ db / (n - 1))
    cov = float(da @ db / (n - 1))

    def se2(expected, mc):
        return math.sqrt(mc * mc + (extra_rel_se * expected) ** 2)

    return [
        MomentCheck(prefix + "mean_a", float(a.mean()), law.mean_a, math.sqrt(var_a / n), z_max),
        MomentCheck(prefix + "mean_b", float(b.mean()), law.mean_b, math.sqrt(var_b / n), z_max),
        MomentCheck(prefix + "var_a", var_a, law.var_a,
                    se2(law.var_a, float(np.std(da * da) / math.sqrt(n))), z_max),
        MomentCheck(prefix + "var_b", var_b, law.var_b,
                    se2(law.var_b, float(np.std(db * db) / math.sqrt(n))), z_max),
        MomentCheck(prefix + "cov_ab", cov, law.cov_ab,
                    se2(abs(law.cov_ab), float(np.std(da * db) / math.sqrt(n))), z_max),
    ]


def plugin_suite(alpha, draws=100_000, delta_hat=0.0, tau_sq=1.0, seed=0):
    """Plug-in sampler draws against the conditional law, plus the exact
    reconstruction identity."""
    test = TestSummary("validation", delta_hat, tau_sq)
    pairs = draw_split_pairs(test, SplitConfig(alpha, draws, seed))
    a = np.array([p.delta_hat_a for p in pairs])
    b = np.array([p.delta_hat_b for p in pairs])
    checks = moment_checks(a, b, conditional_law(test, alpha), prefix=f"plugin[alpha={alpha:g}].")
    recon = alpha * a + (1.0 - alpha) * b
    scale = np.maximum(np.abs(delta_hat), np.maximum(np.abs(alpha * a), np.abs((1.0 - alpha) * b)))
    rel_err = float(np.max(np.abs(recon - delta_hat) / scale))
    checks.append(MomentCheck(f"plugin[alpha={alpha:g}].reconstruction_max_rel_error", rel_err, 0.0, 1e-12 / 3.0))
    return checks


def unit_level_suite(alpha=0.5, repartitions=50_000, n_per_arm=10_000, tau_sq=1.0, true_delta=0.0, seed=0,
                     panel_se=True):
    """Repartitions of one simulated panel against the conditional law given
    the panel's own full-sample estimate and the nominal ``tau_sq``.

    The panel's within-arm sample variances deviate from their nominal
    value with relative standard error ``1/sqrt(n_per_arm - 1)``.  With
    ``panel_se`` that term is added to the Monte Carlo error of the second
    moments; without it only Monte Carlo error is allowed for.
    """
    panel = simulate_units(true_delta, tau_sq, n_per_arm, generator(seed, Domain.UNIT_OUTCOME, 0, 0))
    pairs = repartition_series(panel, SplitConfig(alpha, repartitions, seed), tau_sq)
    a = np.array([p.delta_hat_a for p in pairs])
    b = np.array([p.delta_hat_b for p in pairs])
    law = conditional_law(TestSummary("panel", panel.delta_hat, tau_sq), alpha)
    return moment_checks(a, b, law, prefix=f"unit[alpha={alpha:g}].",
                         extra_rel_se=1.0 / math.sqrt(n_per_arm - 1) if panel_se else 0.0)


def validate_sampler(alphas=(0.3, 0.5, 0.8), draws=100_000, repartitions=50_000, n_per_arm=10_000,
                     seed=0):
    """Run both suites; returns ``{"passed": bool, "checks": [dict, ...]}``."""
    checks = []
    for alpha in alphas:
        checks.extend(plugin_suite(alpha, draws, seed=seed))
    if repartitions > 0:
        checks.extend(unit_level_suite(0.5, repartitions, n_per_arm, seed=seed))
    rows = [c.as_dict() for c in checks]
    return {"passed": all(c.passed for c in checks), "checks": rows}
