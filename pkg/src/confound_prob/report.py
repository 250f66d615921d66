"""CSV and JSON serialisation of analysis and sweep results."""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

from .analysis import CaseResult, SweepResult

RESULT_COLUMNS = (
    "case_id", "domain", "rr_normalized", "theta_obs", "s", "evalue", "gamma_star",
    "p_exceed", "mean_theta_true", "theta_ci_lo", "theta_ci_hi", "mean_log_gamma", "flags",
)
SWEEP_COLUMNS = ("case_id", "sigma_gamma", "p_exceed")
SPAN_COLUMNS = ("case_id", "stability_span")
NUMERIC_RESULT_COLUMNS = RESULT_COLUMNS[2:-1]


def fmt(x) -> str:
    """Numbers as written to every output file: 10 significant digits."""
    if x is None:
        return ""
    return f"{float(x):.10g}"


def result_row(r: CaseResult) -> dict:
    lo, hi = r.theta_true_ci if r.theta_true_ci is not None else (None, None)
    return {
        "case_id": r.case_id,
        "domain": r.domain,
        "rr_normalized": fmt(r.rr_normalized),
        "theta_obs": fmt(r.theta_obs),
        "s": fmt(r.s),
        "evalue": fmt(r.evalue),
        "gamma_star": fmt(r.gamma_star),
        "p_exceed": fmt(r.p_exceed),
        "mean_theta_true": fmt(r.mean_theta_true),
        "theta_ci_lo": fmt(lo),
        "theta_ci_hi": fmt(hi),
        "mean_log_gamma": fmt(r.mean_log_gamma),
        "flags": r.flags_text,
    }


def _csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def results_csv(results: Iterable[CaseResult]) -> str:
    return _csv(RESULT_COLUMNS, (result_row(r) for r in results))


def results_json(results: Iterable[CaseResult], **meta) -> str:
    """JSON mirror of the CSV; numbers are parsed back from their 10-digit text."""
    records = []
    for r in results:
        row = result_row(r)
        rec = {k: (float(v) if k in NUMERIC_RESULT_COLUMNS and v != "" else (None if v == "" else v))
               for k, v in row.items()}
        rec["flags"] = [f for f in row["flags"].split(";") if f]
        rec["engine"] = r.engine.value
        rec["sigma_theta"] = float(fmt(r.prior.sigma_theta))
        rec["sigma_gamma"] = float(fmt(r.prior.sigma_gamma))
        rec["p_exceed_se"] = None if r.p_exceed_se is None else float(fmt(r.p_exceed_se))
        records.append(rec)
    return json.dumps({**meta, "results": records}, indent=2) + "\n"


def read_results_csv(text: str) -> list[dict]:
    """Parse a results CSV; numeric columns become floats (None when empty)."""
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in RESULT_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"results file lacks columns: {', '.join(missing)}")
    rows = []
    for row in reader:
        out = dict(row)
        for c in NUMERIC_RESULT_COLUMNS:
            out[c] = float(row[c]) if row[c] != "" else None
        rows.append(out)
    return rows


def sweep_csv(sweeps: Iterable[SweepResult]) -> str:
    rows = (
        {"case_id": sw.case_id, "sigma_gamma": fmt(sg), "p_exceed": fmt(p)}
        for sw in sweeps
        for sg, p in sw.grid
    )
    return _csv(SWEEP_COLUMNS, rows)


def span_csv(sweeps: Iterable[SweepResult]) -> str:
    return _csv(SPAN_COLUMNS, ({"case_id": sw.case_id, "stability_span": fmt(sw.stability_span)} for sw in sweeps))


def read_sweep_csv(text: str) -> dict[str, list[tuple[float, float]]]:
    """Long-format sweep file to {case_id: [(sigma_gamma, p_exceed), ...]}."""
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in SWEEP_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"sweep file lacks columns: {', '.join(missing)}")
    out: dict[str, list[tuple[float, float]]] = {}
    for row in reader:
        out.setdefault(row["case_id"], []).append((float(row["sigma_gamma"]), float(row["p_exceed"])))
    for pts in out.values():
        pts.sort()
    return out
