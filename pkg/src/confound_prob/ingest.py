"""Case files: reading, validation and writing.

Schema (UTF-8, ``.`` decimals, empty cell = absent)::

    case_id,domain,measure,point,ci_lower,ci_upper,se_log,evalue

Rows that give only an E-value get their point estimate reconstructed with
:func:`evalue.ratio_from_evalue`; such records carry ``point_reconstructed``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .effect_measures import EffectEstimate, Measure
from .evalue import ratio_from_evalue

CASE_COLUMNS = ("case_id", "domain", "measure", "point", "ci_lower", "ci_upper", "se_log", "evalue")


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    domain: str
    measure: Measure
    point: float
    ci_lower: Optional[float] = None
    ci_upper: Optional[float] = None
    se_log: Optional[float] = None
    evalue: Optional[float] = None
    point_reconstructed: bool = False

    def estimate(self) -> EffectEstimate:
        return EffectEstimate(self.measure, self.point, self.ci_lower, self.ci_upper, self.se_log)


@dataclass(frozen=True)
class Issue:
    line: int
    field: str
    message: str

    def as_dict(self) -> dict:
        return {"line": self.line, "field": self.field, "message": self.message}


class SchemaError(ValueError):
    pass


class CaseValidationError(ValueError):
    """One or more rows failed validation; ``issues`` holds the report."""

    def __init__(self, issues: list[Issue]):
        self.issues = list(issues)
        first = self.issues[0]
        more = f" (+{len(self.issues) - 1} more)" if len(self.issues) > 1 else ""
        super().__init__(f"line {first.line}, {first.field}: {first.message}{more}")

    def report(self) -> list[dict]:
        return [i.as_dict() for i in self.issues]


def _number(raw: str, field: str, line: int, issues: list[Issue], positive: bool = True):
    raw = raw.strip()
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        issues.append(Issue(line, field, f"not a number: {raw!r}"))
        return None
    if not math.isfinite(value) or (positive and value <= 0):
        issues.append(Issue(line, field, f"must be a positive finite number, got {raw!r}"))
        return None
    return value


def _parse_row(row: dict, line: int) -> tuple[Optional[CaseRecord], list[Issue]]:
    issues: list[Issue] = []
    case_id = (row.get("case_id") or "").strip()
    if not case_id:
        issues.append(Issue(line, "case_id", "empty case_id"))
    domain = (row.get("domain") or "").strip()
    measure_raw = (row.get("measure") or "").strip().upper()
    try:
        measure = Measure(measure_raw)
    except ValueError:
        issues.append(Issue(line, "measure", f"expected RR, OR or HR, got {measure_raw!r}"))
        measure = None
    nums = {f: _number(row.get(f) or "", f, line, issues) for f in ("point", "ci_lower", "ci_upper", "se_log", "evalue")}
    if nums["evalue"] is not None and nums["evalue"] < 1.0:
        issues.append(Issue(line, "evalue", f"E-value must be >= 1, got {nums['evalue']}"))
        nums["evalue"] = None
    ci_given = [(row.get(f) or "").strip() != "" for f in ("ci_lower", "ci_upper")]
    if ci_given[0] != ci_given[1]:
        issues.append(Issue(line, "ci_lower" if not ci_given[0] else "ci_upper", "CI bounds must be given together"))
    if all((row.get(f) or "").strip() == "" for f in ("point", "evalue")):
        issues.append(Issue(line, "point", "row has neither point nor evalue"))
    if issues:
        return None, issues

    point, reconstructed = nums["point"], False
    if point is None:
        point, reconstructed = ratio_from_evalue(nums["evalue"]), True
    try:
        record = CaseRecord(
            case_id=case_id,
            domain=domain,
            measure=measure,
            point=point,
            ci_lower=nums["ci_lower"],
            ci_upper=nums["ci_upper"],
            se_log=nums["se_log"],
            evalue=nums["evalue"],
            point_reconstructed=reconstructed,
        )
        record.estimate()
    except ValueError as exc:
        return None, [Issue(line, "ci_lower", str(exc))]
    return record, []


def parse_cases(text: Union[str, Iterable[str]]) -> tuple[list[CaseRecord], list[Issue]]:
    """Validate every row; returns the good records and the issue list."""
    handle = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.DictReader(handle)
    header = reader.fieldnames or []
    missing = [c for c in CASE_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"missing header columns: {', '.join(missing)}")
    records: list[CaseRecord] = []
    issues: list[Issue] = []
    seen: dict[str, int] = {}
    for row in reader:
        line = reader.line_num
        record, row_issues = _parse_row(row, line)
        if record is not None and record.case_id in seen:
            row_issues = [Issue(line, "case_id", f"duplicate case_id {record.case_id!r} (first on line {seen[record.case_id]})")]
            record = None
        if record is None:
            issues.extend(row_issues)
            continue
        seen[record.case_id] = line
        records.append(record)
    return records, issues


def read_cases(path: Union[str, Path], skip_invalid: bool = False) -> list[CaseRecord]:
    """Read a case file; any invalid row fails the whole file unless skipped.

    With ``skip_invalid`` the bad rows are dropped; use :func:`parse_cases`
    to get at the issue report as well.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        records, issues = parse_cases(fh)
    if issues and not skip_invalid:
        raise CaseValidationError(issues)
    return records


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def format_cases(records: Iterable[CaseRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CASE_COLUMNS)
    for r in records:
        writer.writerow([
            r.case_id,
            r.domain,
            r.measure.value,
            "" if r.point_reconstructed else _fmt(r.point),
            _fmt(r.ci_lower),
            _fmt(r.ci_upper),
            _fmt(r.se_log),
            _fmt(r.evalue),
        ])
    return buf.getvalue()


def write_cases(records: Iterable[CaseRecord], path: Union[str, Path]) -> None:
    Path(path).write_text(format_cases(records), encoding="utf-8")


def paper_cases_path() -> Path:
    """The bundled 11-case fixture (points reconstructed from E-values)."""
    return Path(str(resources.files("confound_prob") / "data" / "paper_cases.csv"))


def load_paper_cases() -> list[CaseRecord]:
    return read_cases(paper_cases_path())
