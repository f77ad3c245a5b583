"""Experiment configuration: a YAML document, validated into ``ExperimentConfig``.

Top-level keys (all optional except ``stream``)::

    seed: 0                    # partition shuffle seed
    n_parts: 20
    checkpoints: [5, 10, ..., 100]
    standardize: true          # online per-feature standardization
    workers: 1                 # process pool size for independent runs
    output_dir: out            # else $SPAMSTREAM_OUT, else ./out
    algorithms: [scw, {name: alma, hyperparameters: {alpha: 0.9}}]
    baselines: [train_once, retrain_each_interval]
    combos: [UP, UN+UA]        # feature-set combinations (ablate, extract)
    fit: {reg: 1.0e-4, epochs: 500, lr: 0.1, tol: 1.0e-8}
    report: {name: report.csv, table: table.csv, input: null}
    stream: <source>

A source is a mapping with a ``type``:

* ``synthetic``: dim, n_per_class, mean_pos, mean_neg, noise_scale, [spam_ratio, seed, name]
* ``flip_drift``: dim, n_per_class, separation, noise_scale, [spam_ratio, seed]; two phases
* ``examples``: path (JSONL example stream), [name, dim]
* ``records``: path (JSONL user records), [combo, name, lexicons]
* ``synthetic_records``: n_per_class, [spam_ratio, seed, name, combo]
* ``drift``: first: <source>, second: <source>
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from ..baseline import BaselinePolicy, FitConfig
from ..features.registry import ABLATION_COMBOS, UnknownCombo, parse_combo
from ..learners.models import AlgorithmSpec, UnknownAlgorithm
from .runs import ABLATION_ALGORITHMS, DEFAULT_CHECKPOINTS, DEFAULT_N_PARTS, validate_checkpoints

OUTPUT_ENV = "SPAMSTREAM_OUT"
DEFAULT_OUTPUT_DIR = "out"

TOP_LEVEL_KEYS = ("seed", "n_parts", "checkpoints", "standardize", "workers", "output_dir",
                  "algorithms", "baselines", "combos", "fit", "report", "stream")
SOURCE_KEYS = {
    "synthetic": ({"dim", "n_per_class", "mean_pos", "mean_neg", "noise_scale"},
                  {"spam_ratio", "seed", "name"}),
    "flip_drift": ({"dim", "n_per_class", "separation", "noise_scale"}, {"spam_ratio", "seed"}),
    "examples": ({"path"}, {"name", "dim"}),
    "records": ({"path"}, {"combo", "name", "lexicons"}),
    "synthetic_records": ({"n_per_class"}, {"spam_ratio", "seed", "name", "combo"}),
    "drift": ({"first", "second"}, set()),
}
LEXICON_KEYS = ("spam_phrases", "liwc", "sentiment", "pos")


class ConfigError(ValueError):
    """Schema violation; ``token`` is the offending key or value."""

    def __init__(self, message: str, token: str = "") -> None:
        super().__init__(message)
        self.token = token


def _expect(cond: bool, message: str, token: Any) -> None:
    if not cond:
        raise ConfigError(message, str(token))


def _int(value, key: str, minimum: int = 0) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool) and value >= minimum,
            f"{key} must be an integer >= {minimum}", key)
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    stream: dict
    seed: int = 0
    n_parts: int = DEFAULT_N_PARTS
    checkpoints: tuple[float, ...] = DEFAULT_CHECKPOINTS
    standardize: bool = True
    workers: int = 1
    output_dir: Optional[str] = None
    algorithms: tuple[AlgorithmSpec, ...] = ()
    baselines: tuple[BaselinePolicy, ...] = ()
    combos: tuple[str, ...] = ()
    fit: FitConfig = FitConfig()
    report: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def resolve_output_dir(self) -> Path:
        chosen = self.output_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT_DIR
        return Path(chosen)

    def resolve_path(self, value: str) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path

    def ablation_algorithms(self) -> tuple[AlgorithmSpec, ...]:
        return self.algorithms or tuple(AlgorithmSpec(n) for n in ABLATION_ALGORITHMS)

    def ablation_combos(self) -> tuple[str, ...]:
        return self.combos or ABLATION_COMBOS


def parse_algorithm(entry) -> AlgorithmSpec:
    if isinstance(entry, str):
        return AlgorithmSpec(entry.strip())
    _expect(isinstance(entry, dict) and "name" in entry, "algorithm entries need a name", entry)
    unknown = set(entry) - {"name", "hyperparameters", "covariance"}
    _expect(not unknown, f"unknown algorithm key {sorted(unknown)[0] if unknown else ''}",
            sorted(unknown)[0] if unknown else "")
    hps = entry.get("hyperparameters") or {}
    _expect(isinstance(hps, dict), "hyperparameters must be a mapping", entry["name"])
    try:
        return AlgorithmSpec(str(entry["name"]), hps, entry.get("covariance", "auto"))
    except UnknownAlgorithm:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), str(entry["name"])) from None


def parse_combo_name(combo) -> str:
    _expect(isinstance(combo, str), "combos must be strings such as 'UN+UA'", combo)
    if combo in ABLATION_COMBOS:
        return combo
    return "+".join(parse_combo(combo))


def validate_source(src, where: str = "stream") -> dict:
    _expect(isinstance(src, dict), f"{where} must be a mapping", where)
    kind = src.get("type")
    _expect(kind in SOURCE_KEYS, f"{where}: unknown source type {kind!r}", kind)
    required, optional = SOURCE_KEYS[kind]
    missing = required - set(src)
    _expect(not missing, f"{where}: missing {', '.join(sorted(missing))}", ",".join(sorted(missing)))
    extra = set(src) - required - optional - {"type"}
    _expect(not extra, f"{where}: unknown key {', '.join(sorted(extra))}", ",".join(sorted(extra)))
    if kind == "drift":
        first = validate_source(src["first"], f"{where}.first")
        second = validate_source(src["second"], f"{where}.second")
        for side in (first, second):
            _expect(side["type"] not in ("drift", "flip_drift"),
                    f"{where}: drift phases must be single streams", side["type"])
        return {"type": "drift", "first": first, "second": second}
    out = dict(src)
    if "combo" in out:
        out["combo"] = parse_combo_name(out["combo"])
    if "lexicons" in out:
        lex = out["lexicons"]
        _expect(isinstance(lex, dict) and set(lex) == set(LEXICON_KEYS),
                f"{where}.lexicons needs exactly {', '.join(LEXICON_KEYS)}", "lexicons")
    for key in ("dim", "n_per_class"):
        if key in out:
            _int(out[key], f"{where}.{key}", 1)
    if "seed" in out:
        _int(out["seed"], f"{where}.seed")
    return out


def from_mapping(doc: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    _expect(isinstance(doc, dict), "config must be a mapping", "")
    for key in doc:
        _expect(key in TOP_LEVEL_KEYS, f"unknown config key {key!r}", key)
    _expect("stream" in doc, "config needs a stream source", "stream")
    kwargs: dict[str, Any] = {"stream": validate_source(doc["stream"]), "base_dir": base_dir}
    if "seed" in doc:
        kwargs["seed"] = _int(doc["seed"], "seed")
    if "n_parts" in doc:
        kwargs["n_parts"] = _int(doc["n_parts"], "n_parts", 1)
    if "workers" in doc:
        kwargs["workers"] = _int(doc["workers"], "workers", 1)
    if "checkpoints" in doc:
        try:
            kwargs["checkpoints"] = validate_checkpoints(doc["checkpoints"] or ())
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "checkpoints") from None
    if "standardize" in doc:
        _expect(isinstance(doc["standardize"], bool), "standardize must be true or false",
                "standardize")
        kwargs["standardize"] = doc["standardize"]
    if doc.get("output_dir") is not None:
        kwargs["output_dir"] = str(doc["output_dir"])
    if "algorithms" in doc:
        _expect(isinstance(doc["algorithms"], list), "algorithms must be a list", "algorithms")
        kwargs["algorithms"] = tuple(parse_algorithm(a) for a in doc["algorithms"])
    if "baselines" in doc:
        _expect(isinstance(doc["baselines"], list), "baselines must be a list", "baselines")
        kwargs["baselines"] = tuple(_baseline(b) for b in doc["baselines"])
    if "combos" in doc:
        _expect(isinstance(doc["combos"], list), "combos must be a list", "combos")
        kwargs["combos"] = tuple(parse_combo_name(c) for c in doc["combos"])
    if "fit" in doc:
        fit = doc["fit"]
        _expect(isinstance(fit, dict) and set(fit) <= {"reg", "epochs", "lr", "tol"},
                "fit accepts reg, epochs, lr, tol", "fit")
        kwargs["fit"] = FitConfig(**fit)
    if "report" in doc:
        rep = doc["report"] or {}
        _expect(isinstance(rep, dict) and set(rep) <= {"name", "table", "input"},
                "report accepts name, table, input", "report")
        kwargs["report"] = dict(rep)
    return ExperimentConfig(**kwargs)


def _baseline(value) -> BaselinePolicy:
    try:
        return BaselinePolicy.parse(value)
    except ValueError:
        raise ConfigError(f"unknown baseline: {value}", str(value)) from None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config does not parse: {exc}".splitlines()[0], str(path)) from None
    return from_mapping(doc, path.parent)


def apply_overrides(cfg: ExperimentConfig, *, seed: Optional[int] = None,
                    output_dir: Optional[str] = None, algorithms: Optional[list[str]] = None,
                    combos: Optional[list[str]] = None,
                    checkpoints: Optional[list[float]] = None,
                    report_input: Optional[str] = None) -> ExperimentConfig:
    changes: dict[str, Any] = {}
    if seed is not None:
        changes["seed"] = _int(seed, "seed")
    if output_dir is not None:
        changes["output_dir"] = output_dir
    if algorithms is not None:
        changes["algorithms"] = tuple(parse_algorithm(a) for a in algorithms)
    if combos is not None:
        changes["combos"] = tuple(parse_combo_name(c) for c in combos)
    if checkpoints is not None:
        try:
            changes["checkpoints"] = validate_checkpoints(checkpoints)
        except ValueError as exc:
            raise ConfigError(str(exc), "checkpoints") from None
    if report_input is not None:
        changes["report"] = {**cfg.report, "input": report_input}
    return replace(cfg, **changes)


__all__ = ["ConfigError", "ExperimentConfig", "UnknownAlgorithm", "UnknownCombo", "apply_overrides",
           "from_mapping", "load_config", "parse_algorithm", "validate_source", "OUTPUT_ENV"]
