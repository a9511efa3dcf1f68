"""Ground-truth estimands for the Gaussian-prior setting.

Closed forms cover homoskedastic tests: Bayes shrinkage vs the unbiased
estimator under squared error, and the posterior-sign rule vs the 5% test
under launch-only value.  Training on an ``alpha`` split only inflates the
training variance to ``tau_sq / alpha``, so split variants are the ideal
ones evaluated at that variance.

:func:`split_estimand_numeric` computes the same quantities by quadrature
for any built-in methodology, measure and (possibly heteroskedastic)
variance law, and is the independent reference for the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import (
    AlphaOutOfRange,
    DgpParams,
    IncompatibleMeasure,
    Measure,
    MethodologyKind,
    MethodologySpec,
    NonPositiveVariance,
    OutputClass,
    PrecisionUnreachable,
    check_alpha,
)
from .methodologies import launch_threshold, shrinkage_weight
from .normal import Z975, norm_pdf, norm_sf

__all__ = [
    "OracleInputs",
    "ideal_mse_relative",
    "split_mse_relative",
    "ideal_launch_relative",
    "split_launch_relative",
    "performance_estimand",
    "split_estimand_numeric",
]

_PHI0 = 1.0 / math.sqrt(2.0 * math.pi)
# P(|Z| > 7) = 2.6e-12, comfortably inside the 1e-10 truncation budget.
_VARIANCE_NOISE_ZMAX = 7.0


@dataclass(frozen=True)
class OracleInputs:
    sigma_sq: float
    tau_sq: float
    alpha: Optional[float] = None
    launch_z: float = Z975

    def __post_init__(self):
        for name in ("sigma_sq", "tau_sq"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise NonPositiveVariance(f"{name} must be positive, got {value!r}")
        if self.alpha is not None:
            check_alpha(self.alpha)


def _training_variance(inputs: OracleInputs, split: bool) -> float:
    if not split:
        return inputs.tau_sq
    if inputs.alpha is None:
        raise AlphaOutOfRange("split estimands need alpha in (0, 1)")
    return inputs.tau_sq / inputs.alpha


def _mse_relative(sigma_sq, v):
    return sigma_sq / (sigma_sq + v) - 1.0


def _launch_relative(sigma_sq, v, z):
    return _PHI0 / norm_pdf(math.sqrt(v) * z / math.sqrt(sigma_sq + v)) - 1.0


def ideal_mse_relative(inputs: OracleInputs) -> float:
    """Relative MSE change of Bayes shrinkage over the unbiased estimator."""
    return _mse_relative(inputs.sigma_sq, _training_variance(inputs, False))


def split_mse_relative(inputs: OracleInputs) -> float:
    return _mse_relative(inputs.sigma_sq, _training_variance(inputs, True))


def ideal_launch_relative(inputs: OracleInputs) -> float:
    """Relative launch-only value gain of the posterior-sign rule over the 5% test."""
    return _launch_relative(inputs.sigma_sq, _training_variance(inputs, False), inputs.launch_z)


def split_launch_relative(inputs: OracleInputs) -> float:
    return _launch_relative(inputs.sigma_sq, _training_variance(inputs, True), inputs.launch_z)


@lru_cache(maxsize=None)
def _hermite(n):
    # Probabilists' Gauss-Hermite: E[f(Z)] ~= sum(w * f(x)).
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=None)
def _legendre(n, upper):
    # Nodes and weights for E[f(|Z|)] truncated to |Z| <= upper.
    x, w = np.polynomial.legendre.leggauss(n)
    z = 0.5 * upper * (x + 1.0)
    return z, 0.5 * upper * w * 2.0 * norm_pdf(z)


def _conditional_performance(spec, measure, delta, v, n_inner):
    """E over the training estimate ``N(delta, v)`` of the performance, for
    each ``delta`` (array) and training variance ``v`` (scalar)."""
    if spec.output_class is OutputClass.ESTIMATE:
        if measure.output_class is not OutputClass.ESTIMATE:
            raise IncompatibleMeasure(f"{measure.value} needs a decision rule")
        w = float(shrinkage_weight(spec, v))
        x, wt = _hermite(n_inner)
        train = delta[:, None] + math.sqrt(v) * x[None, :]
        err = w * train - delta[:, None]
        p = err if measure is Measure.BIAS else err * err
        return p @ wt
    if measure.output_class is not OutputClass.DECISION:
        raise IncompatibleMeasure(f"{measure.value} needs an estimator")
    launch_prob = norm_sf((float(launch_threshold(spec, v)) - delta) / math.sqrt(v))
    if measure is Measure.LAUNCH_ONLY_DECISION_VALUE:
        return launch_prob * delta
    return (2.0 * launch_prob - 1.0) * delta


def _theta_given_tau(spec, measure, sigma_sq, tau_sq, alpha, n_prior, n_inner):
    v = tau_sq if alpha is None else tau_sq / alpha
    if sigma_sq == 0.0:
        return float(_conditional_performance(spec, measure, np.zeros(1), v, n_inner)[0])
    x, wt = _hermite(n_prior)
    return float(_conditional_performance(spec, measure, math.sqrt(sigma_sq) * x, v, n_inner) @ wt)


def _theta(spec, measure, dgp, alpha, n):
    n_prior = n
    n_inner = 32  # exact for the quadratic integrands of linear estimators
    if not dgp.heteroskedastic:
        return _theta_given_tau(spec, measure, dgp.sigma_sq, dgp.tau_sq_base, alpha, n_prior, n_inner)
    z, wz = _legendre(n, _VARIANCE_NOISE_ZMAX)
    vals = np.array([
        _theta_given_tau(spec, measure, dgp.sigma_sq, dgp.tau_sq_base + zi * zi, alpha, n_prior, n_inner)
        for zi in z
    ])
    return float(vals @ wz)


def performance_estimand(spec: MethodologySpec, measure: Measure, dgp: DgpParams,
                         alpha: Optional[float], precision: float = 1e-9, max_nodes: int = 1024):
    """Average performance of ``spec`` when trained on an ``alpha`` split.

    ``alpha=None`` gives the full-sample (ideal) estimand.  Quadrature node
    counts are doubled until successive values agree within ``precision``.
    """
    measure = Measure(measure)
    if spec.kind is MethodologyKind.CUSTOM:
        raise TypeError("numeric estimands are available for built-in methodologies only")
    if alpha is not None:
        check_alpha(alpha)
    n = 16
    prev = _theta(spec, measure, dgp, alpha, n)
    while n < max_nodes:
        n *= 2
        cur = _theta(spec, measure, dgp, alpha, n)
        if abs(cur - prev) <= precision:
            return cur
        prev = cur
    raise PrecisionUnreachable(
        f"quadrature did not settle to {precision} within {max_nodes} nodes "
        f"(last change {abs(cur - prev):.3g})"
    )


def split_estimand_numeric(methodologies, measure: Measure, dgp: DgpParams, alpha: Optional[float],
                           precision: float = 1e-9):
    """Numeric estimand for one methodology or the relative difference of a pair.

    A single :class:`MethodologySpec` gives its average performance; a pair
    ``(m1, m2)`` gives ``(theta_2 - theta_1) / theta_1``.  ``alpha=None``
    selects the ideal (full-sample) estimand.
    """
    if isinstance(methodologies, MethodologySpec):
        return performance_estimand(methodologies, measure, dgp, alpha, precision)
    m1, m2 = methodologies
    t1 = performance_estimand(m1, measure, dgp, alpha, precision)
    t2 = performance_estimand(m2, measure, dgp, alpha, precision)
    return (t2 - t1) / t1
