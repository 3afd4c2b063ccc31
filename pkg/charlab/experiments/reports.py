"""Experiment reports: CSV and JSON writers and expectation checks for --assert runs."""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import yaml

from ..core.errors import AssertionMismatch

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def jsonable(value: Any) -> Any:
    """Plain JSON value: fractions as "n/d" strings, complex numbers as [re, im]."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


def _cell(value: Any) -> str:
    value = jsonable(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


@dataclass
class Report:
    """Rows and summary of one experiment run."""

    subcommand: str
    config: Dict[str, Any] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    payload: Dict[str, Any] = field(default_factory=dict)
    partial: bool = False

    def add_row(self, row: Mapping[str, Any]) -> None:
        self.rows.append(dict(row))

    @property
    def columns(self) -> List[str]:
        """Row keys in first-seen order."""
        seen: Dict[str, None] = {}
        for row in self.rows:
            for key in row:
                seen.setdefault(key, None)
        if self.partial:
            seen.setdefault("partial", None)
        return list(seen)

    def as_dict(self) -> Dict[str, Any]:
        """JSON document; payload keys sit at the top level next to the envelope and never replace it."""
        envelope = {
            "schema": SCHEMA_VERSION,
            "subcommand": self.subcommand,
            "config": jsonable(self.config),
            "summary": jsonable(self.summary),
            "rows": [jsonable(row) for row in self.rows],
            "partial": self.partial,
        }
        extra = {k: jsonable(v) for k, v in self.payload.items() if k not in envelope}
        return {**extra, **envelope}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """Rows only; a partial report carries partial = true on every row."""
        columns = self.columns
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in self.rows:
            values = dict(row, partial=True) if self.partial else row
            writer.writerow([_cell(values.get(c)) for c in columns])
        return buffer.getvalue()

    def render(self, fmt: str = "json") -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()

    def write(self, path: str, fmt: str = "json") -> None:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="", encoding="utf-8") as f:
            f.write(self.render(fmt))
        marker = " (partial)" if self.partial else ""
        logger.info("Wrote %s report with %d rows to %s%s", fmt, len(self.rows), target, marker)


# expectations


def _number(value: Any) -> Optional[float]:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float, Fraction)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            return None
    return None


def _same(actual: Any, expected: Any, tolerance: float = 0.0) -> bool:
    a, e = _number(actual), _number(expected)
    if a is not None and e is not None:
        return abs(a - e) <= tolerance
    return jsonable(actual) == jsonable(expected)


def _compare(label: str, actual: Any, expected: Any) -> List[str]:
    """Mismatch messages for one value against a scalar or a {value, tolerance, min, max} rule."""
    if actual is None:
        return [f"{label}: missing from report"]
    if not isinstance(expected, Mapping):
        return [] if _same(actual, expected) else [f"{label}: expected {expected!r}, got {jsonable(actual)!r}"]
    problems = []
    if "value" in expected:
        tolerance = float(expected.get("tolerance", 0.0))
        if not _same(actual, expected["value"], tolerance):
            problems.append(f"{label}: expected {expected['value']!r} within {tolerance}, got {jsonable(actual)!r}")
    number = _number(actual)
    for bound, ok in (("min", lambda a, b: a >= b), ("max", lambda a, b: a <= b)):
        if bound in expected:
            limit = _number(expected[bound])
            if number is None or limit is None or not ok(number, limit):
                problems.append(f"{label}: expected {bound} {expected[bound]!r}, got {jsonable(actual)!r}")
    return problems


def _lookup(data: Mapping[str, Any], key: str) -> Any:
    current: Any = data
    for part in key.split("."):
        if not isinstance(current, Mapping) or part not in current:
            return None
        current = current[part]
    return current


def check_expectations(report: Report, expectations: Mapping[str, Any]) -> List[str]:
    """Compare a report against an expectation document.

    The document has optional sections: summary (key -> rule), rows (a list of {match, values}
    selecting rows by exact field values) and every_row (key -> rule applied to all rows).
    A rule is a scalar, or a mapping with value/tolerance and/or min/max.

    Returns:
        Mismatch messages; empty when the report meets every expectation
    """
    problems: List[str] = []
    summary = jsonable(report.summary)
    for key, expected in (expectations.get("summary") or {}).items():
        problems.extend(_compare(f"summary.{key}", _lookup(summary, key), expected))
    if expectations.get("row_count") is not None:
        problems.extend(_compare("row_count", len(report.rows), expectations["row_count"]))
    for index, rule in enumerate(expectations.get("rows") or []):
        match = rule.get("match") or {}
        selected = [r for r in report.rows if all(_same(r.get(k), v) for k, v in match.items())]
        if not selected:
            problems.append(f"rows[{index}]: no row matches {dict(match)}")
        for row in selected:
            for key, expected in (rule.get("values") or {}).items():
                problems.extend(_compare(f"rows[{index}] {dict(match)} {key}", row.get(key), expected))
    for key, expected in (expectations.get("every_row") or {}).items():
        for position, row in enumerate(report.rows):
            problems.extend(_compare(f"row {position} {key}", row.get(key), expected))
    return problems


def load_expectations(path: str) -> Dict[str, Any]:
    """Read an expectation file; YAML, so JSON files load too."""
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"Expectation file {path} must hold a mapping")
    return data


def assert_expectations(report: Report, path: str) -> None:
    """Raises AssertionMismatch listing every deviation of the report from the expectation file."""
    problems = check_expectations(report, load_expectations(path))
    if problems:
        raise AssertionMismatch("; ".join(problems))
    logger.info("Report meets every expectation in %s", path)
