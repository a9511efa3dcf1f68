"""Plug-in methodologies evaluated on (estimate, variance) pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MethodologyKind, MethodologySpec, NonPositiveVariance, OutputClass

__all__ = ["MethodologyOutput", "apply", "kappa", "launch_threshold", "shrinkage_weight"]


@dataclass(frozen=True)
class MethodologyOutput:
    value: float | np.ndarray
    output_class: OutputClass


def shrinkage_weight(spec: MethodologySpec, tau_sq):
    """Multiplier applied to the estimate by a linear estimator."""
    kind = spec.kind
    if kind is MethodologyKind.IDENTITY:
        return np.ones_like(np.asarray(tau_sq, dtype=np.float64))
    if kind is MethodologyKind.FIXED_SHRINKAGE:
        return np.full_like(np.asarray(tau_sq, dtype=np.float64), spec.param)
    if kind is MethodologyKind.BAYES_SHRINKAGE:
        return spec.param / (spec.param + np.asarray(tau_sq, dtype=np.float64))
    raise TypeError(f"{spec.label} is not a linear estimator")


def launch_threshold(spec: MethodologySpec, tau_sq):
    """Estimate above which a built-in rule launches (strictly greater)."""
    tau_sq = np.asarray(tau_sq, dtype=np.float64)
    if spec.kind is MethodologyKind.THRESHOLD_RULE:
        return np.sqrt(tau_sq) * spec.param
    if spec.kind is MethodologyKind.BAYES_SIGN_RULE:
        return np.zeros_like(tau_sq)
    raise TypeError(f"{spec.label} is not a built-in decision rule")


def kappa(spec: MethodologySpec, delta_hat, tau_sq):
    """Vectorised methodology output as a float array (decisions are 0.0/1.0)."""
    delta_hat = np.asarray(delta_hat, dtype=np.float64)
    tau_sq = np.asarray(tau_sq, dtype=np.float64)
    kind = spec.kind
    if kind is MethodologyKind.IDENTITY:
        return delta_hat.copy() if delta_hat.ndim else delta_hat + 0.0
    if kind in (MethodologyKind.FIXED_SHRINKAGE, MethodologyKind.BAYES_SHRINKAGE):
        return shrinkage_weight(spec, tau_sq) * delta_hat
    if kind is MethodologyKind.THRESHOLD_RULE:
        return (delta_hat > np.sqrt(tau_sq) * spec.param).astype(np.float64)
    if kind is MethodologyKind.BAYES_SIGN_RULE:
        # The posterior mean is a positive multiple of delta_hat, so its sign
        # is the sign of delta_hat; testing delta_hat avoids underflow.
        return (delta_hat > 0.0).astype(np.float64)
    out = np.asarray(spec.fn(delta_hat, tau_sq), dtype=np.float64)
    if spec.output_class is OutputClass.DECISION and not np.all((out == 0.0) | (out == 1.0)):
        raise ValueError(f"{spec.label} returned a decision other than 0 or 1")
    return out


def apply(spec: MethodologySpec, delta_hat, tau_sq) -> MethodologyOutput:
    """Run ``spec`` on a training estimate and its sampling variance.

    Accepts scalars or arrays; ``tau_sq`` must be strictly positive.
    """
    tau_arr = np.asarray(tau_sq, dtype=np.float64)
    if not np.all(np.isfinite(tau_arr) & (tau_arr > 0.0)):
        raise NonPositiveVariance(f"tau_sq must be positive and finite, got {tau_sq!r}")
    value = kappa(spec, delta_hat, tau_arr)
    if np.ndim(value) == 0:
        value = float(value)
    return MethodologyOutput(value, spec.output_class)
