"""Benchmark harness: configuration, suite execution, metrics and reports."""
from .config import RunConfig, ScenarioEntry, SuiteConfig, SuiteParams, bundled_config, load_config, parse_config
from .metrics import Metrics, evaluate_edit, mask_iou
from .report import CSV_HEADER, emit_report, render_csv, render_json
from .suite import BucketSummary, Report, Row, run_suite

__all__ = [
    "BucketSummary", "CSV_HEADER", "Metrics", "Report", "Row", "RunConfig", "ScenarioEntry",
    "SuiteConfig", "SuiteParams", "bundled_config", "emit_report", "evaluate_edit", "load_config",
    "mask_iou", "parse_config", "render_csv", "render_json", "run_suite",
]
