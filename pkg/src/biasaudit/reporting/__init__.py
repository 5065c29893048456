"""Chart rendering and report assembly."""

from .charts import ChartKind, ChartSpec, render_chart
from .report import Finding, ReportDocument, assemble_report, recommendations_for, sig4

__all__ = [
    "ChartKind",
    "ChartSpec",
    "Finding",
    "ReportDocument",
    "assemble_report",
    "recommendations_for",
    "render_chart",
    "sig4",
]
