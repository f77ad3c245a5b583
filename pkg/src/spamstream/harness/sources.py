"""Turn validated source mappings into example streams or user records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..features.extract import extract_stream
from ..features.lexicon import LexiconResources, bundled_lexicons, load_lexicons
from ..features.records import UserRecord, read_users
from ..features.registry import SET_ORDER
from ..features.synthetic import generate_users
from ..stream import ExampleStream, SyntheticSpec, flip_drift_specs, generate_synthetic, read_stream
from .config import ConfigError, ExperimentConfig

FULL_COMBO = "+".join(SET_ORDER)


@dataclass(frozen=True)
class Loaded:
    """One or two phases, as example streams; user records kept when available."""

    streams: tuple[ExampleStream, ...]
    users: Optional[tuple[tuple[UserRecord, ...], ...]] = None
    names: tuple[str, ...] = ()

    @property
    def is_drift(self) -> bool:
        return len(self.streams) == 2


def _lexicons(cfg: ExperimentConfig, src: dict) -> LexiconResources:
    if "lexicons" not in src:
        return bundled_lexicons()
    paths = {k: cfg.resolve_path(v) for k, v in src["lexicons"].items()}
    return load_lexicons(paths["spam_phrases"], paths["liwc"], paths["sentiment"], paths["pos"])


def load_users(cfg: ExperimentConfig, src: dict) -> tuple[str, list[UserRecord]]:
    kind = src["type"]
    if kind == "records":
        path = cfg.resolve_path(src["path"])
        return src.get("name", path.stem), read_users(path)
    if kind == "synthetic_records":
        name = src.get("name", "synthetic-users")
        return name, generate_users(src["n_per_class"], src.get("spam_ratio", 0.5),
                                    src.get("seed", 0), name)
    raise ConfigError(f"source type {kind} holds no user records", kind)


def _single(cfg: ExperimentConfig, src: dict, combo: Optional[str]):
    kind = src["type"]
    if kind == "synthetic":
        spec = SyntheticSpec(src["dim"], src["n_per_class"], tuple(src["mean_pos"]),
                             tuple(src["mean_neg"]), float(src["noise_scale"]),
                             float(src.get("spam_ratio", 0.5)), src.get("seed", 0),
                             src.get("name", "synthetic"))
        try:
            return generate_synthetic(spec), None
        except ValueError as exc:
            raise ConfigError(str(exc), "stream") from None
    if kind == "examples":
        path = cfg.resolve_path(src["path"])
        return read_stream(path, src.get("name"), src.get("dim")), None
    name, users = load_users(cfg, src)
    combo = combo or src.get("combo", FULL_COMBO)
    lex = _lexicons(cfg, src) if "UC" in combo else None
    return extract_stream(users, combo, lex, name=name), tuple(users)


def load_source(cfg: ExperimentConfig, combo: Optional[str] = None) -> Loaded:
    src = cfg.stream
    if src["type"] == "flip_drift":
        a, b = flip_drift_specs(src["dim"], src["n_per_class"], float(src["separation"]),
                                float(src["noise_scale"]), src.get("seed", 0),
                                float(src.get("spam_ratio", 0.5)))
        try:
            streams = (generate_synthetic(a), generate_synthetic(b))
        except ValueError as exc:
            raise ConfigError(str(exc), "stream") from None
        return Loaded(streams, None, tuple(s.name for s in streams))
    if src["type"] == "drift":
        first, users_a = _single(cfg, src["first"], combo)
        second, users_b = _single(cfg, src["second"], combo)
        users = (users_a, users_b) if users_a is not None and users_b is not None else None
        return Loaded((first, second), users, (first.name, second.name))
    stream, users = _single(cfg, src, combo)
    return Loaded((stream,), (users,) if users is not None else None, (stream.name,))


def load_record_sets(cfg: ExperimentConfig) -> tuple[list[tuple[str, list[UserRecord]]], LexiconResources]:
    """User records for the ablation: one set, or two for a drift pair."""
    src = cfg.stream
    sides = [src["first"], src["second"]] if src["type"] == "drift" else [src]
    out = []
    for side in sides:
        if side["type"] not in ("records", "synthetic_records"):
            raise ConfigError("ablation needs user-record sources", side["type"])
        out.append(load_users(cfg, side))
    return out, _lexicons(cfg, sides[0])
