"""Sample-splitting evaluation of A/B-test methodologies from test summaries."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DgpParams,
    Measure,
    MethodologyKind,
    MethodologySpec,
    OutputClass,
    SampleSplitError,
    SplitConfig,
    SplitPair,
    TestSummary,
)
from .estimators import ComparisonReport, PerformanceReport, compare, evaluate  # noqa: E402
from .sampler import conditional_law, draw_split_pairs  # noqa: E402

__all__ = [
    "__version__",
    "DgpParams",
    "Measure",
    "MethodologyKind",
    "MethodologySpec",
    "OutputClass",
    "SampleSplitError",
    "SplitConfig",
    "SplitPair",
    "TestSummary",
    "ComparisonReport",
    "PerformanceReport",
    "compare",
    "evaluate",
    "conditional_law",
    "draw_split_pairs",
]
