"""Rendering of reports as versioned JSON envelopes or aligned text tables."""

import json
from collections.abc import Sequence
from importlib.metadata import PackageNotFoundError, version
from typing import Any

from pydantic import BaseModel

from pathflux.config.constants import OUTPUT_FORMATS, SCHEMA_VERSION
from pathflux.model.experiment import ExperimentReport
from pathflux.model.reports import EstimateReport, EstimationResult, OracleResult

ESTIMATE_HEADER = ("Parameter", "Estimate", "SE", "Lower CI", "Upper CI")
VALUE_HEADER = ("Parameter", "Value")
METRIC_HEADER = ("Metric", "Value")

_LABELS = {
    "theta": "theta",
    "theta_p1": "theta_P1",
    "theta_p2": "theta_P2",
    "theta_p3": "theta_P3",
    "theta_p4": "theta_P4",
    "theta_p2_or_p3": "theta_P2vP3",
    "psi": "psi",
    "psi_p1": "psi_P1",
    "psi_p2": "psi_P2",
    "psi_p3": "psi_P3",
    "psi_p4": "psi_P4",
    "psi_p2_or_p3": "psi_P2vP3",
}


def package_version() -> str:
    try:
        return version("pathflux")
    except PackageNotFoundError:
        return "0+unknown"


def envelope(kind: str, provenance: dict[str, Any], result: BaseModel) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "provenance": {**provenance, "version": package_version()},
        "result": result.model_dump(mode="json"),
    }


def _number(value: float) -> str:
    return f"{value:.6f}"


def render_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(row[i]) for row in (header, *rows)) for i in range(len(header))]

    def line(cells: Sequence[str]) -> str:
        first, *rest = cells
        return "  ".join([first.ljust(widths[0]), *(c.rjust(w) for c, w in zip(rest, widths[1:], strict=True))])

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), rule, *(line(row) for row in rows)]) + "\n"


def _estimate_row(name: str, report: EstimateReport) -> tuple[str, ...]:
    return (name, _number(report.point), _number(report.se), _number(report.ci_lo), _number(report.ci_hi))


def estimation_table(result: EstimationResult) -> str:
    rows = [_estimate_row(_LABELS[name], getattr(result.decomposition, name)) for name in _LABELS if "theta" in name]
    rows.append(_estimate_row("tau_conf", result.total.tau_conf))
    rows.extend(_estimate_row(f"f(a={level})", report) for level, report in sorted(result.total.f_curve.items()))
    if result.ate is not None:
        rows.extend(_estimate_row(_LABELS[name], getattr(result.ate, name)) for name in _LABELS if "psi" in name)
    return render_table(ESTIMATE_HEADER, rows)


def oracle_table(result: OracleResult) -> str:
    decomposition = result.decomposition
    rows = [(_LABELS[name], _number(getattr(decomposition, name))) for name in _LABELS if "theta" in name]
    rows.append(("sum_check", str(decomposition.sum_check).lower()))
    rows.append(("tau_conf", _number(result.total.tau_conf)))
    rows.append(("cov_ay", _number(result.total.cov_ay)))
    rows.extend((f"f(a={level})", _number(value)) for level, value in sorted(result.total.f_curve.items()))
    if result.ate is not None:
        rows.extend((_LABELS[name], _number(getattr(result.ate, name))) for name in _LABELS if "psi" in name)
        rows.extend((f"E[Y_{name}]", _number(value)) for name, value in result.ate.means.model_dump().items())
        rows.append(("ate_sum_check", str(result.ate.sum_check).lower()))
    return render_table(VALUE_HEADER, rows)


def _metric(value: object) -> str:
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def experiment_table(report: ExperimentReport) -> str:
    rows = [("kind", str(report.kind)), ("verdict", report.verdict)]
    if report.tolerance is not None:
        rows.append(("tolerance", f"{report.tolerance:g}"))
    rows.extend((name, _metric(value)) for name, value in report.metrics.items())
    rows.extend(("failure", failure) for failure in report.failures)
    return render_table(METRIC_HEADER, rows)


def render(document: dict[str, Any], table: str, output_format: OUTPUT_FORMATS) -> str:
    if output_format == "table":
        return table
    return json.dumps(document, indent=2) + "\n"
