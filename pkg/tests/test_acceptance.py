"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (shown in the terminal summary)
and then asserts the criterion at its stated tolerance.  Run alone with
``pytest tests/test_acceptance.py -v``; the whole module takes several
minutes on one core.
"""

import filecmp
import io
import math

import numpy as np
import pytest

from samplesplit.cli import main
from samplesplit.core import DgpParams, Measure, MethodologySpec, SplitConfig
from samplesplit.estimators import per_test_scores
from samplesplit.harness import (
    BENCHMARK,
    BENCHMARK_SPLIT,
    alpha_trend_checks,
    launch_pair,
    mse_pair,
    run_replications,
    sweep_alpha,
    sweep_size,
    variance_slope,
)
from samplesplit.normal import Z975, norm_cdf
from samplesplit.oracles import (
    OracleInputs,
    ideal_launch_relative,
    ideal_mse_relative,
    split_launch_relative,
    split_mse_relative,
)
from samplesplit.rng import Domain, normals
from samplesplit.validation import plugin_suite, unit_level_suite

PAIRS = {"mse": mse_pair(1.0), "launch": launch_pair(1.0)}


def test_criterion_1_closed_form_oracles(criterion):
    log = criterion(1, "closed-form oracles")
    checks = [
        ("ideal_mse(1,1)", ideal_mse_relative(OracleInputs(1, 1)), -0.5, 1e-12),
        ("split_mse(1,1,0.5)", split_mse_relative(OracleInputs(1, 1, 0.5)), -2.0 / 3.0, 1e-12),
        ("ideal_launch(1,1)", ideal_launch_relative(OracleInputs(1, 1)), 1.612848, 1e-5),
        ("split_launch(1,1,0.5)", split_launch_relative(OracleInputs(1, 1, 0.5)), 2.598861, 1e-5),
    ]
    ok = True
    for name, got, want, tol in checks:
        good = abs(got - want) <= tol
        ok &= good
        log.note(f"{name}={got:.10g} vs {want:.10g} ({'ok' if good else 'off by %.2e' % abs(got - want)})")
    assert log.verdict(ok)


def test_criterion_2_plugin_sampler_validity(criterion):
    log = criterion(2, "plug-in sampler moments and reconstruction")
    failed = []
    for alpha in (0.3, 0.5, 0.8):
        checks = plugin_suite(alpha, draws=100_000, delta_hat=0.0, tau_sq=1.0, seed=0)
        worst = max(abs(c.z) for c in checks[:-1])
        recon = checks[-1].observed
        log.note(f"alpha={alpha}: max|z|={worst:.2f}, max recon rel err={recon:.1e}")
        failed += [c.name for c in checks if not c.passed]
    assert log.verdict(not failed), failed


def test_criterion_3_sampler_partitioner_equivalence(criterion):
    log = criterion(3, "unit-level repartitioning matches the conditional law")
    checks = unit_level_suite(alpha=0.5, repartitions=50_000, n_per_arm=10_000, tau_sq=1.0, seed=0, panel_se=False)
    log.note(", ".join(f"{c.name.split('.')[-1]} z={c.z:+.2f}" for c in checks))
    assert log.verdict(all(c.passed for c in checks))


def _fixed_impact_cases():
    tau_sq, alpha = 1.0, 0.5
    tau_a = math.sqrt(tau_sq / alpha)
    bayes = MethodologySpec.bayes_shrinkage(1.0)
    w = 1.0 / (1.0 + tau_a**2)
    rule = MethodologySpec.threshold_rule(Z975)
    for delta in (0.0, 1.0):
        launch = 1.0 - norm_cdf((tau_a * Z975 - delta) / tau_a)
        yield delta, bayes, Measure.BIAS, (w - 1.0) * delta
        yield delta, bayes, Measure.SQUARED_ERROR, (w - 1.0) ** 2 * delta**2 + w**2 * tau_a**2
        yield delta, rule, Measure.DECISION_VALUE, delta * (2.0 * launch - 1.0)
        yield delta, rule, Measure.LAUNCH_ONLY_DECISION_VALUE, delta * launch


def test_criterion_4_score_unbiasedness(criterion):
    log = criterion(4, "partition scores unbiased for fixed impacts")
    n, tau_sq, alpha = 100_000, 1.0, 0.5
    ok = True
    for k, (delta, spec, measure, expected) in enumerate(_fixed_impact_cases()):
        # fresh full-sample estimates around the fixed impact, then one split each
        parent = delta + math.sqrt(tau_sq) * normals(k, Domain.VALIDATION, 0, np.arange(n), 1)[:, 0]
        (scores,) = per_test_scores(parent, np.full(n, tau_sq), [spec], measure, alpha, 1, seed=k, keep_scores=True)
        scores = scores[:, 0]
        se = scores.std(ddof=1) / math.sqrt(n)
        z = (scores.mean() - expected) / se
        ok &= abs(z) <= 3.0
        log.note(f"{measure.value}@delta={delta:g}: z={z:+.2f}")
    assert log.verdict(ok)


@pytest.mark.slow
def test_criterion_5_simulation_bias_homoskedastic(criterion):
    log = criterion(5, "comparison estimator centred on the split estimand (homoskedastic)")
    dgp = DgpParams(1.0, 2.0, heteroskedastic=False, num_tests=5000)
    closed = {
        "mse": split_mse_relative(OracleInputs(1.0, 2.0, 0.5)),
        "launch": split_launch_relative(OracleInputs(1.0, 2.0, 0.5)),
    }
    ok = True
    for name, (pair, measure) in PAIRS.items():
        m = run_replications(dgp, pair, measure, 200, BENCHMARK_SPLIT)
        sd = math.sqrt(m.variance)
        z = (m.mean_comparison - closed[name]) / (sd / math.sqrt(m.num_replications))
        ok &= abs(z) <= 3.0
        log.note(f"{name}: mean={m.mean_comparison:.5f} vs {closed[name]:.5f}, z={z:+.2f}")
    assert log.verdict(ok)


@pytest.mark.slow
def test_criterion_6_coverage(criterion):
    log = criterion(6, "95% CI coverage of the split estimand at the benchmark")
    ok = True
    for name, (pair, measure) in PAIRS.items():
        m = run_replications(BENCHMARK, pair, measure, 1000, BENCHMARK_SPLIT)
        for arm, cov in enumerate(m.coverage, start=1):
            ok &= 0.93 <= cov <= 0.97
            log.note(f"{name} arm {arm}: {cov:.3f}")
    assert log.verdict(ok)


ALPHA_GRID = (0.2, 0.35, 0.5, 0.65, 0.8)


@pytest.mark.slow
def test_criterion_7_bias_variance_tradeoff(criterion):
    log = criterion(7, "bias-variance tradeoff over alpha")
    ok = True
    best = {}
    for name, (pair, measure) in PAIRS.items():
        sweep = sweep_alpha(BENCHMARK, pair, measure, ALPHA_GRID, 200, BENCHMARK_SPLIT)
        checks = alpha_trend_checks(sweep)
        worst = {}
        for c in checks:
            worst[c["statistic"]] = max(worst.get(c["statistic"], -math.inf), c["violation_se"])
            ok &= c["violation_se"] < 2.0
        mse = [r[3] for r in sweep.rows]
        best[name] = sweep.rows[int(np.argmin(mse))][0]
        log.note(f"{name}: worst bias^2 step {worst['bias_sq_vs_ideal']:+.2f} SE, "
                 f"worst variance step {worst['variance']:+.2f} SE, MSE argmin alpha={best[name]}")
    ok &= any(a > 0.5 for a in best.values())
    assert log.verdict(ok)


@pytest.mark.slow
def test_criterion_8_size_scaling(criterion):
    log = criterion(8, "variance scaling in I and S")
    ok = True
    for name, (pair, measure) in PAIRS.items():
        by_i = sweep_size(BENCHMARK, pair, measure, (500, 2000, 8000), (30,), 1000, BENCHMARK_SPLIT)
        slope = variance_slope(by_i, 30)
        by_s = sweep_size(BENCHMARK, pair, measure, (5000,), (30, 1000), 200, BENCHMARK_SPLIT)
        v30, v1000 = by_s.rows[0][2], by_s.rows[1][2]
        rel = abs(v30 - v1000) / v1000
        ok &= -1.1 <= slope <= -0.9 and rel <= 0.10
        log.note(f"{name}: slope={slope:.3f}, V(S=30)/V(S=1000)-1={v30 / v1000 - 1:+.3f}")
    assert log.verdict(ok)


CLI_COMMANDS = [
    ["compare", "--dgp-preset", "benchmark", "--measure", "squared-error", "--m1", "identity",
     "--m2", "bayes:sigma_sq=1", "--seed", "7"],
    ["evaluate", "--dgp-preset", "benchmark", "--m1", "threshold", "--measure", "launch-only", "--seed", "3",
     "--format", "csv"],
    ["compare", "--sigma-sq", "1", "--tau-sq", "2", "--num-tests", "600", "--sampler", "unit-level",
     "--n-per-arm", "200", "--partitions", "5", "--pair", "launch", "--seed", "5"],
    ["simulate", "--dgp-preset", "benchmark", "--num-tests", "1000", "--pair", "mse", "--replications", "24",
     "--seed", "11"],
    ["sweep-alpha", "--dgp-preset", "benchmark", "--num-tests", "800", "--pair", "launch", "--replications", "16",
     "--alphas", "0.3,0.7", "--format", "csv"],
    ["sweep-size", "--dgp-preset", "benchmark", "--pair", "mse", "--replications", "10",
     "--num-tests-grid", "300,900", "--partitions-grid", "2,8"],
    ["validate-sampler", "--draws", "20000", "--repartitions", "2000", "--n-per-arm", "1000", "--seed", "2"],
]


def test_criterion_9_determinism(criterion, tmp_path):
    log = criterion(9, "CLI output byte-identical across reruns and worker counts")
    ok = True
    for k, cmd in enumerate(CLI_COMMANDS):
        paths = []
        for run, workers in enumerate(("1", "8", "1", "8")):
            path = tmp_path / f"cmd{k}_run{run}.out"
            code = main(cmd + ["--workers", workers, "--output", str(path)], stdout=io.StringIO(), stderr=io.StringIO())
            ok &= code == 0
            paths.append(path)
        same = all(filecmp.cmp(paths[0], p, shallow=False) for p in paths[1:])
        ok &= same
        log.note(f"{cmd[0]}#{k}: {'identical' if same else 'DIFFERENT'}")
    assert log.verdict(ok)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
