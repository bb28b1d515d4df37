"""JSON and CSV output for verification reports."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .verify import RunConfig, VerificationReport, report_document

CSV_COLUMNS = ("checkId", "k", "lhs", "rhs", "absError", "relError", "tolerance", "pass", "runtimeMs", "multipliers")


def write_json(path: str | Path, cfg: RunConfig, reports: list[VerificationReport]) -> None:
    Path(path).write_text(json.dumps(report_document(cfg, reports), indent=2) + "\n")


def write_csv(path: str | Path, reports: list[VerificationReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in reports:
            row = r.to_json()
            writer.writerow({
                "checkId": row["checkId"],
                "k": row["inputs"].get("k", ""),
                "lhs": repr(row["lhs"]),
                "rhs": repr(row["rhs"]),
                "absError": repr(row["absError"]),
                "relError": repr(row["relError"]),
                "tolerance": repr(row["tolerance"]),
                "pass": row["pass"],
                "runtimeMs": row["runtimeMs"],
                "multipliers": ";".join(f"{k}={v}" for k, v in sorted(row["multipliers"].items())),
            })


def summary_line(r: VerificationReport) -> str:
    status = "PASS" if r.passed else "FAIL"
    return f"{status}  {r.check_id:<32} lhs={r.lhs:.15g}  rhs={r.rhs:.15g}  err={r.abs_error:.2e}  tol={r.tolerance:.0e}"
