"""Prequential evaluation: runs, experiment drivers, configs and reports."""

from .report import emit_report, emit_table, read_report, render_report, render_table
from .runs import (
    DEFAULT_CHECKPOINTS,
    Checkpoint,
    Phase,
    RunAborted,
    RunResult,
    checkpoint_position,
    prepare_drift,
    prepare_single,
    run_ablation,
    run_comparison,
    run_drift_experiment,
    run_prequential,
    run_single_dataset,
    score_baseline,
)
