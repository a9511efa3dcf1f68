"""Shared domain types, error classes and configuration validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

__all__ = [
    "SampleSplitError",
    "AlphaOutOfRange",
    "IncompatibleMeasure",
    "NonPositiveVariance",
    "InvalidSize",
    "EmptySplit",
    "EmptyInput",
    "InsufficientTests",
    "InvalidLevel",
    "DegenerateBaseline",
    "PrecisionUnreachable",
    "ParseError",
    "DuplicateTestId",
    "IoError",
    "ConfigError",
    "OutputClass",
    "MethodologyKind",
    "Measure",
    "TestSummary",
    "SplitConfig",
    "SplitPair",
    "DgpParams",
    "MethodologySpec",
    "check_alpha",
    "check_positive_variance",
    "validate_run_config",
]


class SampleSplitError(Exception):
    """Base class.  ``category`` is the machine-readable name used by the CLI."""

    category = "Error"


class AlphaOutOfRange(SampleSplitError, ValueError):
    category = "AlphaOutOfRange"


class IncompatibleMeasure(SampleSplitError, ValueError):
    category = "IncompatibleMeasure"


class NonPositiveVariance(SampleSplitError, ValueError):
    category = "NonPositiveVariance"


class InvalidSize(SampleSplitError, ValueError):
    category = "InvalidSize"


class EmptySplit(SampleSplitError, ValueError):
    category = "EmptySplit"


class EmptyInput(SampleSplitError, ValueError):
    category = "EmptyInput"


class InsufficientTests(SampleSplitError, ValueError):
    category = "InsufficientTests"


class InvalidLevel(SampleSplitError, ValueError):
    category = "InvalidLevel"


class DegenerateBaseline(SampleSplitError, ArithmeticError):
    category = "DegenerateBaseline"


class PrecisionUnreachable(SampleSplitError, ArithmeticError):
    category = "PrecisionUnreachable"


class ParseError(SampleSplitError, ValueError):
    category = "ParseError"


class DuplicateTestId(SampleSplitError, ValueError):
    category = "DuplicateTestId"


class IoError(SampleSplitError, OSError):
    category = "IoError"


class ConfigError(SampleSplitError, ValueError):
    category = "ConfigError"


class OutputClass(str, Enum):
    ESTIMATE = "estimate"
    DECISION = "decision"


class MethodologyKind(str, Enum):
    IDENTITY = "identity"
    FIXED_SHRINKAGE = "fixed_shrinkage"
    BAYES_SHRINKAGE = "bayes_shrinkage"
    THRESHOLD_RULE = "threshold_rule"
    BAYES_SIGN_RULE = "bayes_sign_rule"
    CUSTOM = "custom"


class Measure(str, Enum):
    BIAS = "bias"
    SQUARED_ERROR = "squared_error"
    DECISION_VALUE = "decision_value"
    LAUNCH_ONLY_DECISION_VALUE = "launch_only_decision_value"

    @property
    def output_class(self) -> OutputClass:
        if self in (Measure.BIAS, Measure.SQUARED_ERROR):
            return OutputClass.ESTIMATE
        return OutputClass.DECISION


def check_alpha(alpha: float) -> float:
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise AlphaOutOfRange(f"alpha must lie in the open interval (0, 1), got {alpha!r}")
    return float(alpha)


def check_positive_variance(value: float, name: str = "tau_sq") -> float:
    if not (math.isfinite(value) and value > 0.0):
        raise NonPositiveVariance(f"{name} must be positive and finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class TestSummary:
    """One A/B test: full-sample estimate, its known sampling variance and,
    for simulated data only, the true impact."""

    __test__ = False  # keep pytest from collecting this class

    test_id: str
    delta_hat: float
    tau_sq: float
    true_delta: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.delta_hat):
            raise ValueError(f"delta_hat must be finite, got {self.delta_hat!r}")
        check_positive_variance(self.tau_sq)


@dataclass(frozen=True)
class SplitConfig:
    alpha: float = 0.5
    num_partitions: int = 30
    master_seed: int = 0

    def __post_init__(self):
        check_alpha(self.alpha)
        if int(self.num_partitions) != self.num_partitions or self.num_partitions < 1:
            raise InvalidSize(f"num_partitions must be a positive integer, got {self.num_partitions!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed!r}")


@dataclass(frozen=True)
class DgpParams:
    """Simulation law: ``delta_i ~ N(0, sigma_sq)`` and ``tau_i^2 = tau_sq_base``
    plus an independent chi-squared(1) draw when ``heteroskedastic``."""

    sigma_sq: float = 1.0
    tau_sq_base: float = 2.0
    heteroskedastic: bool = True
    num_tests: int = 5000

    def __post_init__(self):
        if not (math.isfinite(self.sigma_sq) and self.sigma_sq >= 0.0):
            raise NonPositiveVariance(f"sigma_sq must be >= 0, got {self.sigma_sq!r}")
        if not (math.isfinite(self.tau_sq_base) and self.tau_sq_base >= 0.0):
            raise NonPositiveVariance(f"tau_sq_base must be >= 0, got {self.tau_sq_base!r}")
        if not self.heteroskedastic and self.tau_sq_base <= 0.0:
            raise NonPositiveVariance("homoskedastic tests need tau_sq_base > 0")
        if int(self.num_tests) != self.num_tests or self.num_tests < 1:
            raise InvalidSize(f"num_tests must be a positive integer, got {self.num_tests!r}")


@dataclass(frozen=True)
class SplitPair:
    """Training (a) and evaluation (b) estimates for one random partition."""

    partition_index: int
    delta_hat_a: float
    tau_sq_a: float
    delta_hat_b: float
    tau_sq_b: float


@dataclass(frozen=True)
class MethodologySpec:
    """A plug-in methodology: a deterministic map of ``(delta_hat, tau_sq)``.

    Built-in kinds carry their single parameter in ``param``.  ``CUSTOM``
    takes any vectorised callable ``fn(delta_hat, tau_sq)`` together with an
    explicit ``output_class``; decision callables must return 0/1.
    """

    kind: MethodologyKind
    param: Optional[float] = None
    fn: Optional[Callable] = field(default=None, compare=False)
    custom_class: Optional[OutputClass] = None
    name: Optional[str] = None

    def __post_init__(self):
        kind = MethodologyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        p = self.param
        if kind is MethodologyKind.IDENTITY:
            if p is not None:
                raise ConfigError("identity takes no parameter")
        elif kind is MethodologyKind.FIXED_SHRINKAGE:
            if p is None or not 0.0 < p <= 1.0:
                raise ConfigError(f"fixed_shrinkage weight must lie in (0, 1], got {p!r}")
        elif kind in (MethodologyKind.BAYES_SHRINKAGE, MethodologyKind.BAYES_SIGN_RULE):
            if p is None:
                raise ConfigError(f"{kind.value} requires sigma_sq")
            check_positive_variance(p, "sigma_sq")
        elif kind is MethodologyKind.THRESHOLD_RULE:
            if p is None or not (math.isfinite(p) and p >= 0.0):
                raise ConfigError(f"threshold_rule needs a finite c >= 0, got {p!r}")
        elif kind is MethodologyKind.CUSTOM:
            if self.fn is None or self.custom_class is None:
                raise ConfigError("custom methodologies need fn and custom_class")
            object.__setattr__(self, "custom_class", OutputClass(self.custom_class))

    @classmethod
    def identity(cls):
        return cls(MethodologyKind.IDENTITY)

    @classmethod
    def fixed_shrinkage(cls, w):
        return cls(MethodologyKind.FIXED_SHRINKAGE, float(w))

    @classmethod
    def bayes_shrinkage(cls, sigma_sq):
        return cls(MethodologyKind.BAYES_SHRINKAGE, float(sigma_sq))

    @classmethod
    def threshold_rule(cls, c):
        return cls(MethodologyKind.THRESHOLD_RULE, float(c))

    @classmethod
    def bayes_sign_rule(cls, sigma_sq):
        return cls(MethodologyKind.BAYES_SIGN_RULE, float(sigma_sq))

    @classmethod
    def custom(cls, fn, output_class, name="custom"):
        return cls(MethodologyKind.CUSTOM, fn=fn, custom_class=OutputClass(output_class), name=name)

    @property
    def output_class(self) -> OutputClass:
        if self.kind is MethodologyKind.CUSTOM:
            return self.custom_class
        if self.kind in (MethodologyKind.THRESHOLD_RULE, MethodologyKind.BAYES_SIGN_RULE):
            return OutputClass.DECISION
        return OutputClass.ESTIMATE

    @property
    def label(self) -> str:
        """Stable text form, e.g. ``bayes_shrinkage(sigma_sq=1)``."""
        if self.kind is MethodologyKind.CUSTOM:
            return self.name or "custom"
        if self.param is None:
            return self.kind.value
        pname = {
            MethodologyKind.FIXED_SHRINKAGE: "w",
            MethodologyKind.THRESHOLD_RULE: "c",
        }.get(self.kind, "sigma_sq")
        return f"{self.kind.value}({pname}={repr(self.param).removesuffix('.0')})"


def validate_run_config(config: SplitConfig, methodology: MethodologySpec, measure: Measure):
    """Check a run configuration and return it unchanged.

    Dataclass construction already enforces the per-type invariants; this
    re-checks them (configs may have been built with ``object.__new__`` or
    ``dataclasses.replace`` of a foreign object) and adds the cross-type rule
    that the measure must suit the methodology's output class.
    """
    check_alpha(config.alpha)
    if config.num_partitions < 1:
        raise InvalidSize(f"num_partitions must be >= 1, got {config.num_partitions}")
    if methodology.kind in (MethodologyKind.BAYES_SHRINKAGE, MethodologyKind.BAYES_SIGN_RULE):
        check_positive_variance(methodology.param, "sigma_sq")
    measure = Measure(measure)
    if measure.output_class is not methodology.output_class:
        raise IncompatibleMeasure(
            f"measure {measure.value} needs an {measure.output_class.value} methodology, "
            f"but {methodology.label} produces a {methodology.output_class.value}"
        )
    return config, methodology, measure
