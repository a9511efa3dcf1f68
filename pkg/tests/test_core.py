import dataclasses
import math

import pytest

from samplesplit.core import (
    AlphaOutOfRange,
    ConfigError,
    DgpParams,
    IncompatibleMeasure,
    InvalidSize,
    Measure,
    MethodologyKind,
    MethodologySpec,
    NonPositiveVariance,
    OutputClass,
    SplitConfig,
    TestSummary,
    validate_run_config,
)


def test_benchmark_config_is_valid_and_returned_unchanged():
    cfg = SplitConfig(0.5, 30, 0)
    m = MethodologySpec.bayes_shrinkage(1.0)
    out = validate_run_config(cfg, m, Measure.SQUARED_ERROR)
    assert out == (cfg, m, Measure.SQUARED_ERROR)
    # idempotent
    assert validate_run_config(*out) == out


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_alpha_outside_open_interval(alpha):
    with pytest.raises(AlphaOutOfRange):
        SplitConfig(alpha=alpha)


def test_alpha_checked_again_on_foreign_config():
    cfg = SplitConfig()
    object.__setattr__(cfg, "alpha", 1.0)
    with pytest.raises(AlphaOutOfRange):
        validate_run_config(cfg, MethodologySpec.identity(), Measure.BIAS)


def test_decision_rule_with_estimate_measure_is_incompatible():
    with pytest.raises(IncompatibleMeasure):
        validate_run_config(SplitConfig(), MethodologySpec.threshold_rule(1.96), Measure.SQUARED_ERROR)
    with pytest.raises(IncompatibleMeasure):
        validate_run_config(SplitConfig(), MethodologySpec.identity(), Measure.DECISION_VALUE)


def test_measure_accepts_string_value():
    _, _, m = validate_run_config(SplitConfig(), MethodologySpec.bayes_sign_rule(1), "launch_only_decision_value")
    assert m is Measure.LAUNCH_ONLY_DECISION_VALUE


@pytest.mark.parametrize("sigma_sq", [0.0, -1.0, math.inf])
def test_bayes_prior_variance_must_be_positive(sigma_sq):
    with pytest.raises(NonPositiveVariance):
        MethodologySpec.bayes_shrinkage(sigma_sq)
    with pytest.raises(NonPositiveVariance):
        MethodologySpec.bayes_sign_rule(sigma_sq)


def test_methodology_parameter_ranges():
    with pytest.raises(ConfigError):
        MethodologySpec.fixed_shrinkage(0.0)
    with pytest.raises(ConfigError):
        MethodologySpec.fixed_shrinkage(1.01)
    MethodologySpec.fixed_shrinkage(1.0)
    with pytest.raises(ConfigError):
        MethodologySpec.threshold_rule(-0.1)
    MethodologySpec.threshold_rule(0.0)
    with pytest.raises(ConfigError):
        MethodologySpec(MethodologyKind.IDENTITY, 1.0)
    with pytest.raises(ConfigError):
        MethodologySpec(MethodologyKind.CUSTOM)


def test_output_class_is_decision_iff_rule():
    rules = {MethodologyKind.THRESHOLD_RULE, MethodologyKind.BAYES_SIGN_RULE}
    specs = [MethodologySpec.identity(), MethodologySpec.fixed_shrinkage(0.5), MethodologySpec.bayes_shrinkage(1),
             MethodologySpec.threshold_rule(1), MethodologySpec.bayes_sign_rule(1)]
    for s in specs:
        assert (s.output_class is OutputClass.DECISION) == (s.kind in rules)
    for m in Measure:
        expected = OutputClass.ESTIMATE if m in (Measure.BIAS, Measure.SQUARED_ERROR) else OutputClass.DECISION
        assert m.output_class is expected


def test_labels():
    assert MethodologySpec.identity().label == "identity"
    assert MethodologySpec.bayes_shrinkage(1).label == "bayes_shrinkage(sigma_sq=1)"
    assert MethodologySpec.fixed_shrinkage(0.95).label == "fixed_shrinkage(w=0.95)"
    assert MethodologySpec.threshold_rule(1.5).label == "threshold_rule(c=1.5)"
    assert MethodologySpec.custom(lambda d, t: d, "estimate", name="mine").label == "mine"


@pytest.mark.parametrize("tau_sq", [0.0, -1.0, math.inf, math.nan])
def test_test_summary_rejects_bad_variance(tau_sq):
    with pytest.raises(NonPositiveVariance):
        TestSummary("t", 0.1, tau_sq)


def test_test_summary_rejects_non_finite_estimate():
    with pytest.raises(ValueError):
        TestSummary("t", math.inf, 1.0)


def test_partitions_and_seed():
    with pytest.raises(InvalidSize):
        SplitConfig(num_partitions=0)
    with pytest.raises(InvalidSize):
        SplitConfig(num_partitions=2.5)
    with pytest.raises(ConfigError):
        SplitConfig(master_seed=-1)
    with pytest.raises(ConfigError):
        SplitConfig(master_seed=2**64)


def test_dgp_params():
    DgpParams(0.0, 0.0, True)
    with pytest.raises(NonPositiveVariance):
        DgpParams(1.0, 0.0, heteroskedastic=False)
    with pytest.raises(NonPositiveVariance):
        DgpParams(-1.0, 1.0)
    with pytest.raises(InvalidSize):
        DgpParams(num_tests=0)


def test_types_are_immutable():
    cfg = SplitConfig()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.alpha = 0.3
