import csv
import io
import json
from collections.abc import Sequence
from typing import Any

from wahbakit.domain.quaternion import to_list
from wahbakit.domain.readers import ReportWriter
from wahbakit.domain.solvers import SolveReport

REPORT_FIELDS = ("method", "q", "lambda", "iterations", "residual", "taste")


def report_to_dict(report: SolveReport) -> dict[str, Any]:
    return {
        "method": report.method.value,
        "q": to_list(report.q),
        "lambda": report.eigenvalue,
        "iterations": report.iterations,
        "residual": report.residual,
        "taste": report.taste,
        "lambda_history": list(report.lambda_history),
    }


class JsonReportWriter(ReportWriter):
    def render_report(self, report: SolveReport) -> str:
        return json.dumps(report_to_dict(report), indent=2) + "\n"

    def render_rows(self, rows: Sequence[dict[str, Any]]) -> str:
        return json.dumps(list(rows), indent=2) + "\n"


class CsvReportWriter(ReportWriter):
    def render_report(self, report: SolveReport) -> str:
        data = report_to_dict(report)
        row = {key: data[key] for key in REPORT_FIELDS}
        v1, v2, v3, s = row.pop("q")
        return self._render([{"method": row.pop("method"), "v1": v1, "v2": v2, "v3": v3, "s": s, **row}])

    def render_rows(self, rows: Sequence[dict[str, Any]]) -> str:
        return self._render(rows)

    @staticmethod
    def _render(rows: Sequence[dict[str, Any]]) -> str:
        buffer = io.StringIO()
        if rows:
            writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        return buffer.getvalue()


def report_writer_for(fmt: str) -> ReportWriter:
    return CsvReportWriter() if fmt == "csv" else JsonReportWriter()
