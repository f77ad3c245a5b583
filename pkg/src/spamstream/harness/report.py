"""Report writers: a long per-checkpoint table and a wide, table-shaped one."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

from ..baseline import SUBSTITUTION_NOTE
from .runs import Checkpoint, RunResult

COLUMNS = ("run_id", "phase", "checkpoint_pct", "cumulative_error", "mistakes", "seen")

ALIGNMENT_NOTE = ("baselines are scored on parts 2..n only (no prediction for part 1); "
                  "online learners are scored from the first example")


def format_pct(pct: float) -> str:
    return str(int(pct)) if float(pct).is_integer() else repr(float(pct))


def format_error(err: float) -> str:
    return f"{err:.3f}"


def notes(results: Sequence[RunResult]) -> list[str]:
    """Caveats that apply to a result set; printed as ``#`` lines in reports."""
    if any(r.kind == "baseline" for r in results):
        return [SUBSTITUTION_NOTE, ALIGNMENT_NOTE]
    return []


def _write(path: str | Path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def render_report(results: Sequence[RunResult], delimiter: str = ",") -> str:
    if not results:
        raise ValueError("no results to report")
    buf = io.StringIO()
    for line in notes(results):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in results:
        for c in r.checkpoints:
            writer.writerow((r.run_id, c.phase, format_pct(c.pct), format_error(c.error),
                             c.mistakes, c.seen))
    return buf.getvalue()


def emit_report(results: Sequence[RunResult], path: str | Path, delimiter: str = ",") -> Path:
    """One row per (run, checkpoint) in result order. Wall-clock times are
    deliberately left out so that reruns produce identical bytes."""
    return _write(path, render_report(results, delimiter))


def render_table(results: Sequence[RunResult], delimiter: str = ",") -> str:
    """Rows are (phase, percent) grid points, columns are runs; a blank cell
    means the run has no value there (a baseline before its first prediction)."""
    if not results:
        raise ValueError("no results to report")
    grid: list[tuple[str, float]] = []
    for r in results:
        for c in r.checkpoints:
            if (c.phase, c.pct) not in grid:
                grid.append((c.phase, c.pct))
    phase_rank = {p: i for i, p in enumerate(dict.fromkeys(ph for ph, _ in grid))}
    grid.sort(key=lambda g: (phase_rank[g[0]], g[1]))
    cells = {(r.run_id, c.phase, c.pct): c.error for r in results for c in r.checkpoints}
    buf = io.StringIO()
    for line in notes(results):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(("phase", "checkpoint_pct", *(r.run_id for r in results)))
    for phase, pct in grid:
        row = [phase, format_pct(pct)]
        for r in results:
            err = cells.get((r.run_id, phase, pct))
            row.append("" if err is None else format_error(err))
        writer.writerow(row)
    return buf.getvalue()


def emit_table(results: Sequence[RunResult], path: str | Path, delimiter: str = ",") -> Path:
    return _write(path, render_table(results, delimiter))


def read_report(path: str | Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def results_from_rows(rows: Sequence[dict[str, str]]) -> list[RunResult]:
    """Rebuild (checkpoint-only) results from a long report for re-rendering."""
    grouped: dict[str, list[Checkpoint]] = {}
    for row in rows:
        pct = float(row["checkpoint_pct"])
        grouped.setdefault(row["run_id"], []).append(
            Checkpoint(row["phase"], int(pct) if pct.is_integer() else pct,
                       int(row["seen"]), int(row["mistakes"])))
    out = []
    for run_id, cps in grouped.items():
        algorithm, feature_set, stream = (run_id.split("/", 2) + ["", ""])[:3]
        kind = "baseline" if algorithm in ("train_once", "retrain_each_interval") else "online"
        last = cps[-1]
        out.append(RunResult(run_id, algorithm, feature_set, stream, tuple(cps),
                             last.mistakes, last.seen, 0.0, kind))
    return out
