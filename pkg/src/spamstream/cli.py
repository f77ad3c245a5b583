"""Command-line driver: generate, extract, run, ablate, report.

Exit status: 0 on success, 1 on I/O failure, 2 on an unknown token or a
schema violation, 3 when a learner aborts a run. Failures print one JSON
object on standard error, for example
``{"error": "unknown_algorithm", "message": "unknown algorithm: svm", "token": "svm"}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .features.lexicon import LexiconError
from .features.records import RecordError, write_users
from .features.registry import UnknownCombo
from .harness.config import ConfigError, ExperimentConfig, apply_overrides, load_config
from .harness.report import emit_report, emit_table, read_report, results_from_rows
from .harness.runs import RunAborted, RunResult, run_ablation, run_drift_experiment, run_single_dataset
from .harness.sources import load_record_sets, load_source, load_users
from .learners.models import ALGORITHMS, UnknownAlgorithm
from .stream import write_stream

COMMANDS = ("generate", "extract", "run", "ablate", "report")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _checkpoint_list(text: str) -> list[float]:
    out = []
    for tok in _csv_list(text):
        try:
            value = float(tok)
        except ValueError:
            raise ConfigError(f"checkpoint {tok!r} is not a number", tok) from None
        out.append(int(value) if value.is_integer() else value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spamstream", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "generate": "write synthetic example streams or user records",
        "extract": "turn user records into feature-vector streams, one per combination",
        "run": "prequential runs of the configured learners and baselines",
        "ablate": "feature-set ablation over user records",
        "report": "render a table-shaped report from a long report file",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("config", help="experiment config (YAML)")
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir")
        p.add_argument("--algorithms", type=_csv_list, help="comma-separated names")
        p.add_argument("--combos", type=_csv_list, help="comma-separated, e.g. UP,UN+UA")
        p.add_argument("--checkpoints", help="comma-separated percents")
        if name == "report":
            p.add_argument("--input", help="long report to render (default: <output>/report.csv)")
    return parser


def _summary(results: Sequence[RunResult], written: Sequence[Path]) -> None:
    print(f"runs executed: {len(results)}")
    for r in results:
        print(f"{r.run_id}\tfinal_error={r.final_error:.3f}\tseen={r.seen}")
    for path in written:
        print(f"wrote {path}")


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = cfg.resolve_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    src = cfg.stream
    sides = [src["first"], src["second"]] if src["type"] == "drift" else [src]
    written = []
    if all(s["type"] == "synthetic_records" for s in sides):
        for side in sides:
            name, users = load_users(cfg, side)
            path = out / f"{name}.records.jsonl"
            write_users(users, path)
            written.append(path)
            print(f"{name}: {len(users)} user records")
    else:
        if any(s["type"] not in ("synthetic", "flip_drift") for s in sides):
            raise ConfigError("generate needs synthetic sources", src["type"])
        loaded = load_source(cfg)
        for stream in loaded.streams:
            path = out / f"{stream.name}.jsonl"
            write_stream(stream, path)
            written.append(path)
            print(f"{stream.name}: {len(stream)} examples, dim {stream.dim}")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_extract(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    src = cfg.stream
    combos = cfg.combos or (src.get("combo", "UP+UN+UA+UC"),)
    written = []
    for combo in combos:
        loaded = load_source(cfg, combo)
        if loaded.users is None:
            raise ConfigError("extract needs user-record sources", src["type"])
        for stream in loaded.streams:
            path = out / f"{stream.name}.{combo}.jsonl"
            write_stream(stream, path)
            written.append(path)
            print(f"{stream.name} [{combo}]: {len(stream)} examples, dim {stream.dim}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _report_names(cfg: ExperimentConfig, default_stem: str) -> tuple[str, str]:
    return (cfg.report.get("name", f"{default_stem}.csv"),
            cfg.report.get("table", f"{default_stem}_table.csv"))


def cmd_run(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    loaded = load_source(cfg)
    specs = cfg.algorithms or ALGORITHMS
    kwargs = dict(checkpoints=cfg.checkpoints, n_parts=cfg.n_parts, seed=cfg.seed,
                  standardize=cfg.standardize, fit=cfg.fit, workers=cfg.workers)
    if loaded.is_drift:
        results = run_drift_experiment(*loaded.streams, specs, cfg.baselines, **kwargs)
    else:
        results = run_single_dataset(loaded.streams[0], specs, cfg.baselines, **kwargs)
    long_name, table_name = _report_names(cfg, "report")
    written = [emit_report(results, out / long_name), emit_table(results, out / table_name)]
    _summary(results, written)
    return 0


def cmd_ablate(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    record_sets, lex = load_record_sets(cfg)
    (name_a, users_a), *rest = record_sets
    users_b, name_b = (rest[0][1], rest[0][0]) if rest else (None, "")
    results = run_ablation(users_a, cfg.ablation_algorithms(), cfg.ablation_combos(),
                           users_b=users_b, lex=lex, checkpoints=cfg.checkpoints,
                           n_parts=cfg.n_parts, seed=cfg.seed, standardize=cfg.standardize,
                           name=name_a, name_b=name_b or "records-b", workers=cfg.workers)
    long_name, table_name = _report_names(cfg, "ablation")
    written = [emit_report(results, out / long_name), emit_table(results, out / table_name)]
    _summary(results, written)
    return 0


def cmd_report(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    source = cfg.report.get("input")
    path = cfg.resolve_path(source) if source else out / "report.csv"
    rows = read_report(path)
    if not rows:
        raise ConfigError(f"{path} holds no report rows", str(path))
    try:
        results = results_from_rows(rows)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path} is not a long report ({exc})", str(path)) from None
    table = emit_table(results, out / cfg.report.get("table", "table.csv"))
    _summary(results, [table])
    return 0


HANDLERS = {"generate": cmd_generate, "extract": cmd_extract, "run": cmd_run,
            "ablate": cmd_ablate, "report": cmd_report}


def _absolute(path: Optional[str]) -> Optional[str]:
    # flag paths are relative to the working directory, config paths to the config file
    return str(Path(path).resolve()) if path else None


def dispatch(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    checkpoints = _checkpoint_list(args.checkpoints) if args.checkpoints is not None else None
    cfg = apply_overrides(cfg, seed=args.seed, output_dir=args.output_dir,
                          algorithms=args.algorithms, combos=args.combos,
                          checkpoints=checkpoints, report_input=_absolute(getattr(args, "input", None)))
    return HANDLERS[args.command](cfg)


def _fail(status: int, kind: str, message: str, token: str = "") -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "token": token},
                                separators=(", ", ": ")) + "\n")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except UnknownAlgorithm as exc:
        return _fail(2, "unknown_algorithm", str(exc), exc.name)
    except UnknownCombo as exc:
        return _fail(2, "unknown_combo", str(exc), exc.token)
    except ConfigError as exc:
        return _fail(2, "schema", str(exc), exc.token)
    except (RecordError, LexiconError) as exc:
        return _fail(2, "schema", str(exc))
    except RunAborted as exc:
        return _fail(3, "run_aborted", str(exc), exc.run_id)
    except OSError as exc:
        return _fail(1, "io", f"{exc.strerror or exc}: {exc.filename or ''}".rstrip(": "),
                     str(exc.filename or ""))
    except ValueError as exc:
        # e.g. malformed stream files or invalid synthetic specs
        return _fail(2, "schema", str(exc))


if __name__ == "__main__":
    sys.exit(main())
