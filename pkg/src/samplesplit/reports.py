"""Reading test summaries and writing/reading reports.

Input CSV: header ``test_id,delta_hat,tau_sq`` (an optional fourth column
``true_delta`` is accepted), UTF-8, one test per row.

Reports are emitted as JSON (canonical) or CSV.  Reals are written in their
shortest round-trip form, so every value is recovered exactly on reading.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, fields

import numpy as np

from .core import (
    DuplicateTestId,
    IoError,
    NonPositiveVariance,
    ParseError,
    TestSummary,
)
from .estimators import ComparisonReport, PerformanceReport
from .harness import AlphaSweep, ReplicationMetrics, SizeSweep

__all__ = [
    "SUMMARY_COLUMNS",
    "ingest_summaries",
    "parse_summaries",
    "to_jsonable",
    "emit_report",
    "parse_report",
    "write_output",
]

SUMMARY_COLUMNS = ("test_id", "delta_hat", "tau_sq")
_OPTIONAL_COLUMNS = ("true_delta",)
REPORT_KEYS = tuple(f.name for f in fields(PerformanceReport))
REPLICATION_COLUMNS = (
    "replication", "theta_hat_1", "theta_hat_2", "zeta_sq_hat_1", "zeta_sq_hat_2", "comparison",
    "ci_low_1", "ci_high_1", "ci_low_2", "ci_high_2", "covered_1", "covered_2",
)


def _real(text, row, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"row {row}: {column} is not a number: {text!r}") from None
    return value


def parse_summaries(lines, source="<input>"):
    """Parse CSV lines into :class:`TestSummary` objects.

    Row numbers in diagnostics count the header as row 1.
    """
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{source}: empty file, expected header {','.join(SUMMARY_COLUMNS)}") from None
    except csv.Error as exc:
        raise ParseError(f"{source}: row 1: {exc}") from None
    header = [h.strip() for h in header]
    if tuple(header[:3]) != SUMMARY_COLUMNS or tuple(header[3:]) not in ((), _OPTIONAL_COLUMNS):
        raise ParseError(f"{source}: row 1: header must be {','.join(SUMMARY_COLUMNS)}, got {','.join(header)}")
    width = len(header)
    out, seen = [], {}
    row = 1
    try:
        for record in reader:
            row += 1
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != width:
                raise ParseError(f"{source}: row {row}: expected {width} fields, got {len(record)}")
            test_id = record[0].strip()
            if not test_id:
                raise ParseError(f"{source}: row {row}: empty test_id")
            delta_hat = _real(record[1], row, "delta_hat")
            tau_sq = _real(record[2], row, "tau_sq")
            if not math.isfinite(delta_hat):
                raise ParseError(f"{source}: row {row}: delta_hat must be finite")
            if not (math.isfinite(tau_sq) and tau_sq > 0.0):
                raise NonPositiveVariance(f"{source}: row {row}: tau_sq must be positive and finite, got {record[2].strip()}")
            true_delta = _real(record[3], row, "true_delta") if width == 4 else None
            if test_id in seen:
                raise DuplicateTestId(f"{source}: row {row}: test_id {test_id!r} already used at row {seen[test_id]}")
            seen[test_id] = row
            out.append(TestSummary(test_id, delta_hat, tau_sq, true_delta))
    except csv.Error as exc:
        raise ParseError(f"{source}: row {row}: {exc}") from None
    if not out:
        raise ParseError(f"{source}: no data rows")
    return out


def ingest_summaries(path):
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            return parse_summaries(fh, str(path))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from None


def _fmt_real(x):
    x = float(x)
    if not math.isfinite(x):
        # JSON has no literal for these; the string form still round-trips.
        return json.dumps(repr(x))
    return repr(x)


def _dump(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_real(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_jsonable(report):
    """Plain dict/list form of any report object."""
    if isinstance(report, PerformanceReport):
        return asdict(report)
    if isinstance(report, ComparisonReport):
        return {
            "theta_hat_1": report.theta_hat_1,
            "theta_hat_2": report.theta_hat_2,
            "relative_difference": report.relative_difference,
            "report_1": asdict(report.report_1),
            "report_2": asdict(report.report_2),
        }
    if isinstance(report, AlphaSweep):
        return {"sweep": "alpha", "rows": [dict(zip(report.columns, r)) for r in report.rows]}
    if isinstance(report, SizeSweep):
        return {"sweep": "size", "rows": [dict(zip(report.columns, r)) for r in report.rows]}
    if isinstance(report, ReplicationMetrics):
        out = report.summary()
        out["split_estimand_arms"] = list(report.split_estimand_arms)
        out["replications"] = [dict(zip(REPLICATION_COLUMNS, r)) for r in _replication_rows(report)]
        return out
    if isinstance(report, dict):
        return report
    raise TypeError(f"unsupported report type {type(report).__name__}")


def _replication_rows(m: ReplicationMetrics):
    cov = m.covered
    for r in range(m.num_replications):
        yield (
            r, m.theta_hat[r, 0], m.theta_hat[r, 1], m.zeta_sq_hat[r, 0], m.zeta_sq_hat[r, 1],
            m.comparison[r], m.ci_low[r, 0], m.ci_high[r, 0], m.ci_low[r, 1], m.ci_high[r, 1],
            bool(cov[r, 0]), bool(cov[r, 1]),
        )


def _csv_cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def emit_report(report, fmt="json"):
    """Serialise a report to text in ``fmt`` (``json`` or ``csv``)."""
    if fmt == "json":
        return _dump(to_jsonable(report)) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(report, PerformanceReport):
        return _csv(REPORT_KEYS, [[getattr(report, k) for k in REPORT_KEYS]])
    if isinstance(report, ComparisonReport):
        header = ("arm",) + REPORT_KEYS + ("relative_difference",)
        rows = [
            [arm] + [getattr(r, k) for k in REPORT_KEYS] + [report.relative_difference]
            for arm, r in ((1, report.report_1), (2, report.report_2))
        ]
        return _csv(header, rows)
    if isinstance(report, (AlphaSweep, SizeSweep)):
        return _csv(report.columns, report.rows)
    if isinstance(report, ReplicationMetrics):
        return _csv(REPLICATION_COLUMNS, _replication_rows(report))
    if isinstance(report, dict) and "checks" in report:
        checks = report["checks"]
        header = tuple(checks[0].keys()) if checks else ("name",)
        return _csv(header, [list(c.values()) for c in checks])
    if isinstance(report, dict):
        return _csv(tuple(report.keys()), [list(report.values())])
    raise TypeError(f"unsupported report type {type(report).__name__}")


def _revive(obj):
    # Non-finite reals are written as their repr strings.
    if isinstance(obj, str) and obj in ("nan", "inf", "-inf"):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _revive(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_revive(v) for v in obj]
    return obj


def parse_report(text):
    """Inverse of ``emit_report(..., "json")``."""
    data = _revive(json.loads(text))
    if isinstance(data, dict) and set(data) == set(REPORT_KEYS):
        return PerformanceReport(**data)
    if isinstance(data, dict) and "report_1" in data:
        return ComparisonReport(
            data["theta_hat_1"], data["theta_hat_2"], data["relative_difference"],
            PerformanceReport(**data["report_1"]), PerformanceReport(**data["report_2"]),
        )
    if isinstance(data, dict) and data.get("sweep") == "alpha":
        return AlphaSweep([tuple(r[c] for c in AlphaSweep.columns) for r in data["rows"]], [])
    if isinstance(data, dict) and data.get("sweep") == "size":
        return SizeSweep([tuple(r[c] for c in SizeSweep.columns) for r in data["rows"]], [])
    if isinstance(data, dict) and "replications" in data:
        reps = data["replications"]

        def col(name):
            return np.array([r[name] for r in reps], dtype=np.float64)

        return ReplicationMetrics(
            theta_hat=np.column_stack([col("theta_hat_1"), col("theta_hat_2")]),
            zeta_sq_hat=np.column_stack([col("zeta_sq_hat_1"), col("zeta_sq_hat_2")]),
            comparison=col("comparison"),
            ci_low=np.column_stack([col("ci_low_1"), col("ci_low_2")]),
            ci_high=np.column_stack([col("ci_high_1"), col("ci_high_2")]),
            split_estimand_arms=tuple(data["split_estimand_arms"]),
            split_estimand=data["split_estimand"],
            ideal_estimand=data["ideal_estimand"],
            num_tests=data["num_tests"],
            num_partitions=data["num_partitions"],
            alpha=data["alpha"],
            level=data["level"],
        )
    return data


def write_output(text, path=None, stream=None):
    """Write ``text`` to ``path`` or, if None, to ``stream``."""
    if path is None:
        stream.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from None
