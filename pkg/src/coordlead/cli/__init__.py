"""Command-line interface: ingestion, pipeline orchestration, file outputs."""

from coordlead.cli.evaluate import SuiteConfig, run_suites
from coordlead.cli.ingest import (
    IngestError,
    read_dataset_csv,
    read_truth_json,
    write_dataset_csv,
    write_truth_json,
)
from coordlead.cli.main import main
from coordlead.cli.pipeline import (
    ARTIFACTS,
    EXIT_CONFIG,
    EXIT_INGEST,
    EXIT_INTERNAL,
    EXIT_NO_COORDINATION,
    EXIT_OK,
    PipelineConfig,
    PipelineError,
    load_config,
    run_pipeline,
)

__all__ = [
    "IngestError",
    "read_dataset_csv",
    "write_dataset_csv",
    "read_truth_json",
    "write_truth_json",
    "PipelineConfig",
    "PipelineError",
    "load_config",
    "run_pipeline",
    "ARTIFACTS",
    "SuiteConfig",
    "run_suites",
    "main",
    "EXIT_OK",
    "EXIT_INGEST",
    "EXIT_CONFIG",
    "EXIT_NO_COORDINATION",
    "EXIT_INTERNAL",
]
