"""Command-line front end: reports, figures, sweeps, verification."""

from .report import build_report, report_json
from .verify import PAPER_EXAMPLES, run_verification

__all__ = ["build_report", "report_json", "PAPER_EXAMPLES", "run_verification"]
