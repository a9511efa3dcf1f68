"""Command-line interface.

Subcommands: evaluate, compare, simulate, sweep-alpha, sweep-size, oracle,
validate-sampler.  Errors are reported on stderr as ``Category: message``
and mapped to distinct exit codes (see ``EXIT_CODES``).
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

from . import __version__
from .core import (
    ConfigError,
    DgpParams,
    Measure,
    MethodologyKind,
    MethodologySpec,
    SampleSplitError,
    SplitConfig,
)
from .estimators import compare, evaluate
from .harness import (
    BENCHMARK,
    DEFAULT_REPLICATIONS,
    DEFAULT_SWEEP_REPLICATIONS,
    generate_dataset,
    launch_pair,
    mse_pair,
    run_replications,
    sweep_alpha,
    sweep_size,
)
from .normal import Z975
from .oracles import (
    OracleInputs,
    ideal_launch_relative,
    ideal_mse_relative,
    split_estimand_numeric,
    split_launch_relative,
    split_mse_relative,
)
from .reports import emit_report, ingest_summaries, write_output
from .validation import validate_sampler

__all__ = ["main", "parse_methodology", "parse_measure", "EXIT_CODES"]

EXIT_CODES = {
    "ValidationFailed": 1,
    "ConfigError": 2,
    "ParseError": 3,
    "NonPositiveVariance": 4,
    "DuplicateTestId": 5,
    "AlphaOutOfRange": 6,
    "IncompatibleMeasure": 7,
    "IoError": 8,
    "InsufficientTests": 9,
    "DegenerateBaseline": 10,
    "PrecisionUnreachable": 11,
    "InvalidSize": 12,
    "EmptySplit": 13,
    "EmptyInput": 14,
    "InvalidLevel": 15,
    "Error": 70,
}

SEED_ENV = "SAMPLESPLIT_SEED"
WORKERS_ENV = "SAMPLESPLIT_WORKERS"

_KIND_ALIASES = {
    "identity": MethodologyKind.IDENTITY,
    "fixed": MethodologyKind.FIXED_SHRINKAGE,
    "fixed_shrinkage": MethodologyKind.FIXED_SHRINKAGE,
    "bayes": MethodologyKind.BAYES_SHRINKAGE,
    "bayes_shrinkage": MethodologyKind.BAYES_SHRINKAGE,
    "threshold": MethodologyKind.THRESHOLD_RULE,
    "threshold_rule": MethodologyKind.THRESHOLD_RULE,
    "bayes_sign": MethodologyKind.BAYES_SIGN_RULE,
    "bayes_sign_rule": MethodologyKind.BAYES_SIGN_RULE,
}
_PARAM_NAMES = {
    MethodologyKind.FIXED_SHRINKAGE: "w",
    MethodologyKind.BAYES_SHRINKAGE: "sigma_sq",
    MethodologyKind.THRESHOLD_RULE: "c",
    MethodologyKind.BAYES_SIGN_RULE: "sigma_sq",
}
_MEASURE_ALIASES = {
    "bias": Measure.BIAS,
    "squared_error": Measure.SQUARED_ERROR,
    "mse": Measure.SQUARED_ERROR,
    "decision_value": Measure.DECISION_VALUE,
    "launch_only": Measure.LAUNCH_ONLY_DECISION_VALUE,
    "launch_only_decision_value": Measure.LAUNCH_ONLY_DECISION_VALUE,
}


def parse_methodology(text: str) -> MethodologySpec:
    """``identity``, ``fixed:w=0.8``, ``bayes:sigma_sq=1``, ``threshold:c=1.96``
    (``c`` defaults to the two-sided 5% critical value), ``bayes-sign:sigma_sq=1``."""
    name, _, arg = text.strip().partition(":")
    kind = _KIND_ALIASES.get(name.strip().lower().replace("-", "_"))
    if kind is None:
        raise ConfigError(f"unknown methodology {name!r}")
    if kind is MethodologyKind.IDENTITY:
        if arg:
            raise ConfigError("identity takes no parameter")
        return MethodologySpec.identity()
    pname = _PARAM_NAMES[kind]
    if not arg:
        if kind is MethodologyKind.THRESHOLD_RULE:
            return MethodologySpec.threshold_rule(Z975)
        raise ConfigError(f"{name} needs a parameter, e.g. {name}:{pname}=1")
    key, eq, value = arg.partition("=")
    if not eq:
        key, value = pname, key
    if key.strip() != pname:
        raise ConfigError(f"{name} takes parameter {pname!r}, got {key!r}")
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(f"{name}: {pname} must be a number, got {value!r}") from None
    return MethodologySpec(kind, number)


def parse_measure(text: str) -> Measure:
    measure = _MEASURE_ALIASES.get(text.strip().lower().replace("-", "_"))
    if measure is None:
        raise ConfigError(f"unknown measure {text!r}")
    return measure


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _env_int(name):
    value = os.environ.get(name)
    if value is None or not value.strip():
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def _common(p, fmt_choices=("json", "csv"), default_fmt="json"):
    p.add_argument("--seed", type=int, default=None, help=f"master seed (env {SEED_ENV}; default 0)")
    p.add_argument("--workers", type=int, default=None, help=f"worker processes (env {WORKERS_ENV}; default 1)")
    p.add_argument("--format", choices=fmt_choices, default=default_fmt)
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")


def _dgp_args(p, with_input):
    if with_input:
        p.add_argument("--input", "-i", default=None, help="CSV of test summaries")
    p.add_argument("--dgp-preset", choices=("benchmark",), default=None)
    p.add_argument("--sigma-sq", type=float, default=None)
    p.add_argument("--tau-sq", type=float, default=None, help="baseline sampling variance")
    p.add_argument("--homoskedastic", action="store_true", help="drop the chi-squared variance noise")
    p.add_argument("--num-tests", type=int, default=None)


def _split_args(p):
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--partitions", type=int, default=None, help="number of random partitions S")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--sampler", choices=("plugin", "unit-level"), default="plugin")
    p.add_argument("--n-per-arm", type=int, default=1000, help="units per arm for the unit-level sampler")


def _method_args(p, pair):
    p.add_argument("--m1", "--methodology", dest="m1", default=None)
    if pair:
        p.add_argument("--m2", default=None)
        p.add_argument("--pair", choices=("mse", "launch"), default=None,
                       help="preset pair and measure from the simulation study")
    p.add_argument("--measure", default=None)


def build_parser():
    parser = _Parser(prog="samplesplit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="average performance of one methodology")
    _common(p); _dgp_args(p, True); _split_args(p); _method_args(p, False)

    p = sub.add_parser("compare", help="relative performance of two methodologies")
    _common(p); _dgp_args(p, True); _split_args(p); _method_args(p, True)

    p = sub.add_parser("simulate", help="replicated bias/variance/coverage study")
    _common(p); _dgp_args(p, False); _split_args(p); _method_args(p, True)
    p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)

    p = sub.add_parser("sweep-alpha", help="bias-variance tradeoff over split fractions")
    _common(p); _dgp_args(p, False); _split_args(p); _method_args(p, True)
    p.add_argument("--alphas", default="0.2,0.35,0.5,0.65,0.8")
    p.add_argument("--replications", type=int, default=DEFAULT_SWEEP_REPLICATIONS)

    p = sub.add_parser("sweep-size", help="variance over numbers of tests and partitions")
    _common(p); _dgp_args(p, False); _split_args(p); _method_args(p, True)
    p.add_argument("--num-tests-grid", default="500,2000,8000")
    p.add_argument("--partitions-grid", default="1,10,30,100")
    p.add_argument("--replications", type=int, default=DEFAULT_SWEEP_REPLICATIONS)

    p = sub.add_parser("oracle", help="closed-form or numeric reference estimands")
    _common(p, ("text", "json", "csv"), "text")
    p.add_argument("--sigma-sq", type=float, required=True)
    p.add_argument("--tau-sq", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None, help="omit for the full-sample estimand")
    p.add_argument("--kind", choices=("mse", "launch"), required=True)
    p.add_argument("--launch-z", type=float, default=Z975)
    p.add_argument("--heteroskedastic", action="store_true",
                   help="add chi-squared(1) noise to tau_sq and integrate numerically")

    p = sub.add_parser("validate-sampler", help="plug-in sampler vs unit-level repartitioning")
    _common(p)
    p.add_argument("--alphas", default="0.3,0.5,0.8")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--repartitions", type=int, default=50_000)
    p.add_argument("--n-per-arm", type=int, default=10_000)
    return parser


def _seed_workers(args):
    seed = args.seed if args.seed is not None else _env_int(SEED_ENV)
    workers = args.workers if args.workers is not None else _env_int(WORKERS_ENV)
    seed = 0 if seed is None else seed
    workers = 1 if workers is None else workers
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    return seed, workers


def _dgp(args, required):
    explicit = args.sigma_sq is not None or args.tau_sq is not None
    if args.dgp_preset is None and not explicit:
        if required:
            return BENCHMARK
        return None
    base = BENCHMARK
    return DgpParams(
        sigma_sq=args.sigma_sq if args.sigma_sq is not None else base.sigma_sq,
        tau_sq_base=args.tau_sq if args.tau_sq is not None else base.tau_sq_base,
        heteroskedastic=not args.homoskedastic,
        num_tests=args.num_tests if args.num_tests is not None else base.num_tests,
    )


def _split(args, seed):
    return SplitConfig(
        alpha=args.alpha if args.alpha is not None else 0.5,
        num_partitions=args.partitions if args.partitions is not None else 30,
        master_seed=seed,
    )


def _pair(args, dgp):
    if getattr(args, "pair", None):
        if args.m1 or args.m2:
            raise ConfigError("--pair cannot be combined with --m1/--m2")
        sigma_sq = dgp.sigma_sq if dgp is not None and dgp.sigma_sq > 0 else 1.0
        pair, measure = (mse_pair if args.pair == "mse" else launch_pair)(sigma_sq)
        if args.measure is not None and parse_measure(args.measure) is not measure:
            raise ConfigError(f"--pair {args.pair} is scored with {measure.value}")
        return pair, measure
    if not args.m1 or not args.m2:
        raise ConfigError("two methodologies are required: --m1 and --m2 (or --pair)")
    if args.measure is None:
        raise ConfigError("--measure is required")
    return (parse_methodology(args.m1), parse_methodology(args.m2)), parse_measure(args.measure)


def _tests(args, seed):
    dgp_given = args.dgp_preset is not None or args.sigma_sq is not None or args.tau_sq is not None
    if (args.input is None) == (not dgp_given):
        raise ConfigError("give exactly one of --input or a simulated dataset (--dgp-preset/--sigma-sq/--tau-sq)")
    if args.input is not None:
        return ingest_summaries(args.input)
    return generate_dataset(_dgp(args, True), seed)


def _sampler(args):
    return "unit_level" if args.sampler == "unit-level" else "plugin"


def _cmd_evaluate(args, seed, workers):
    if not args.m1 or args.measure is None:
        raise ConfigError("evaluate needs --m1 (or --methodology) and --measure")
    tests = _tests(args, seed)
    return evaluate(tests, parse_methodology(args.m1), parse_measure(args.measure), _split(args, seed),
                    sampler=_sampler(args), level=args.level, n_per_arm=args.n_per_arm, workers=workers)


def _cmd_compare(args, seed, workers):
    tests = _tests(args, seed)
    (m1, m2), measure = _pair(args, _dgp(args, False))
    return compare(tests, m1, m2, measure, _split(args, seed), sampler=_sampler(args), level=args.level,
                   n_per_arm=args.n_per_arm, workers=workers)


def _cmd_simulate(args, seed, workers):
    dgp = _dgp(args, True)
    pair, measure = _pair(args, dgp)
    return run_replications(dgp, pair, measure, args.replications, _split(args, seed),
                            sampler=_sampler(args), level=args.level, workers=workers,
                            n_per_arm=args.n_per_arm)


def _cmd_sweep_alpha(args, seed, workers):
    dgp = _dgp(args, True)
    pair, measure = _pair(args, dgp)
    return sweep_alpha(dgp, pair, measure, _float_list(args.alphas), args.replications,
                       _split(args, seed), level=args.level, workers=workers, sampler=_sampler(args))


def _cmd_sweep_size(args, seed, workers):
    dgp = _dgp(args, True)
    pair, measure = _pair(args, dgp)
    return sweep_size(dgp, pair, measure, _int_list(args.num_tests_grid), _int_list(args.partitions_grid),
                      args.replications, _split(args, seed), level=args.level, workers=workers,
                      sampler=_sampler(args))


def _cmd_oracle(args, seed, workers):
    if args.heteroskedastic:
        dgp = DgpParams(args.sigma_sq, args.tau_sq, heteroskedastic=True)
        if args.kind == "mse":
            pair, measure = mse_pair(args.sigma_sq)
        else:
            pair = (MethodologySpec.threshold_rule(args.launch_z), MethodologySpec.bayes_sign_rule(args.sigma_sq))
            measure = Measure.LAUNCH_ONLY_DECISION_VALUE
        value = split_estimand_numeric(pair, measure, dgp, args.alpha)
    else:
        inputs = OracleInputs(args.sigma_sq, args.tau_sq, args.alpha, args.launch_z)
        split = args.alpha is not None
        fn = {
            ("mse", False): ideal_mse_relative,
            ("mse", True): split_mse_relative,
            ("launch", False): ideal_launch_relative,
            ("launch", True): split_launch_relative,
        }[(args.kind, split)]
        value = fn(inputs)
    return {
        "kind": args.kind,
        "sigma_sq": args.sigma_sq,
        "tau_sq": args.tau_sq,
        "alpha": args.alpha,
        "heteroskedastic": bool(args.heteroskedastic),
        "value": value,
    }


def _cmd_validate(args, seed, workers):
    return validate_sampler(tuple(_float_list(args.alphas)), args.draws, args.repartitions,
                            args.n_per_arm, seed)


_COMMANDS = {
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
    "simulate": _cmd_simulate,
    "sweep-alpha": _cmd_sweep_alpha,
    "sweep-size": _cmd_sweep_size,
    "oracle": _cmd_oracle,
    "validate-sampler": _cmd_validate,
}


def _fail(category, message, stderr):
    for line in str(message).splitlines() or [""]:
        stderr.write(f"{category}: {line}\n")
    return EXIT_CODES.get(category, EXIT_CODES["Error"])


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        seed, workers = _seed_workers(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = _COMMANDS[args.command](args, seed, workers)
        for w in caught:
            stderr.write(f"{w.category.__name__}: {w.message}\n")
        if args.command == "oracle" and args.format == "text":
            text = f"{result['value']:.6f}\n"
        else:
            text = emit_report(result, args.format)
        write_output(text, args.output, stdout)
    except SampleSplitError as exc:
        return _fail(exc.category, exc, stderr)
    except (ValueError, TypeError) as exc:
        return _fail("ConfigError", exc, stderr)
    if args.command == "validate-sampler" and not result["passed"]:
        failed = [c["name"] for c in result["checks"] if not c["passed"]]
        return _fail("ValidationFailed", "failed checks: " + ", ".join(failed), stderr)
    return 0
