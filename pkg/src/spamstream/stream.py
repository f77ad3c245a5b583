"""Labeled examples, streams, partitioning, drift composition and synthetic data."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rng import SplitMix64

SPAMMER = 1
LEGITIMATE = -1


@dataclass(frozen=True, eq=True)
class LabeledExample:
    id: str
    features: Mapping[int, float]
    label: int
    origin: str = ""

    def __post_init__(self) -> None:
        if self.label not in (SPAMMER, LEGITIMATE):
            raise ValueError(f"label must be +1 or -1, got {self.label!r}")
        clean = {}
        for idx, value in self.features.items():
            idx = int(idx)
            if idx < 0:
                raise ValueError(f"negative feature index {idx}")
            if idx in clean:
                raise ValueError(f"duplicate feature index {idx}")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"non-finite value at feature {idx}")
            clean[idx] = value
        object.__setattr__(self, "features", clean)

    def dense(self, dim: int) -> np.ndarray:
        x = np.zeros(dim)
        for idx, value in self.features.items():
            if idx >= dim:
                raise ValueError("dimension overflow")
            x[idx] = value
        return x


def default_feature_names(dim: int) -> tuple[str, ...]:
    return tuple(f"f{i}" for i in range(dim))


@dataclass(frozen=True)
class ExampleStream:
    """Ordered examples plus the feature layout they were encoded with."""

    examples: tuple[LabeledExample, ...]
    name: str
    feature_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "examples", tuple(self.examples))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        dim = len(self.feature_names)
        for ex in self.examples:
            if ex.features and max(ex.features) >= dim:
                raise ValueError(f"example {ex.id} exceeds layout dimension {dim}")

    @property
    def dim(self) -> int:
        return len(self.feature_names)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(X, y)`` arrays in stream order."""
        X = np.zeros((len(self.examples), self.dim))
        y = np.empty(len(self.examples), dtype=int)
        for i, ex in enumerate(self.examples):
            for idx, value in ex.features.items():
                X[i, idx] = value
            y[i] = ex.label
        return X, y

    def labels(self) -> np.ndarray:
        return np.array([ex.label for ex in self.examples], dtype=int)


@dataclass(frozen=True)
class PartitionPlan:
    """Balanced split of a stream into ``n_parts`` contiguous slices of a seeded shuffle.

    ``order[k]`` is the original index of the example at shuffled position
    ``k``; ``assignment[i]`` is the part holding original example ``i``.
    """

    n_parts: int
    seed: int
    assignment: tuple[int, ...]
    order: tuple[int, ...]

    def sizes(self) -> list[int]:
        counts = [0] * self.n_parts
        for p in self.assignment:
            counts[p] += 1
        return counts

    def parts(self, stream: ExampleStream) -> list[ExampleStream]:
        buckets: list[list[LabeledExample]] = [[] for _ in range(self.n_parts)]
        for i in self.order:
            buckets[self.assignment[i]].append(stream.examples[i])
        return [
            ExampleStream(tuple(b), f"{stream.name}[{k}]", stream.feature_names)
            for k, b in enumerate(buckets)
        ]


def part_sizes(n: int, n_parts: int) -> list[int]:
    base, extra = divmod(n, n_parts)
    return [base + (1 if k < extra else 0) for k in range(n_parts)]


def split_into_parts(stream: ExampleStream, n_parts: int = 20, seed: int = 0) -> PartitionPlan:
    n = len(stream)
    if n == 0:
        raise ValueError("empty stream")
    if n_parts < 1:
        raise ValueError("n_parts must be >= 1")
    if n_parts > n:
        raise ValueError("too many parts")
    order = SplitMix64(seed).permutation(n)
    assignment = [0] * n
    pos = 0
    for k, size in enumerate(part_sizes(n, n_parts)):
        for i in order[pos:pos + size]:
            assignment[i] = k
        pos += size
    return PartitionPlan(n_parts, seed, tuple(assignment), tuple(order))


def concat_streams(parts: Sequence[ExampleStream], name: str) -> ExampleStream:
    names = parts[0].feature_names if parts else ()
    examples: list[LabeledExample] = []
    for p in parts:
        if p.feature_names != names:
            raise ValueError("layout mismatch")
        examples.extend(p.examples)
    return ExampleStream(tuple(examples), name, names)


def compose_drift(a: ExampleStream, b: ExampleStream) -> ExampleStream:
    """Concatenate ``a`` then ``b``; origins are kept as they are."""
    if not b.examples:
        return a
    if not a.examples:
        return b
    if a.feature_names != b.feature_names:
        raise ValueError("layout mismatch")
    return ExampleStream(a.examples + b.examples, f"{a.name}+{b.name}", a.feature_names)


@dataclass(frozen=True)
class SyntheticSpec:
    dim: int
    n_per_class: int
    mean_pos: tuple[float, ...]
    mean_neg: tuple[float, ...]
    noise_scale: float
    spam_ratio: float = 0.5
    seed: int = 0
    name: str = "synthetic"

    @property
    def n_total(self) -> int:
        return 2 * self.n_per_class

    @property
    def n_positive(self) -> int:
        return math.floor(self.n_total * self.spam_ratio + 0.5)

    def validate(self) -> None:
        ok = (
            self.dim >= 1
            and self.n_per_class >= 1
            and len(self.mean_pos) == self.dim
            and len(self.mean_neg) == self.dim
            and all(math.isfinite(v) for v in (*self.mean_pos, *self.mean_neg))
            and math.isfinite(self.noise_scale)
            and self.noise_scale > 0
            and 0.0 < self.spam_ratio < 1.0
            and 0 <= self.seed < 1 << 64
        )
        if not ok:
            raise ValueError("invalid spec")


def generate_synthetic(spec: SyntheticSpec) -> ExampleStream:
    """Draw class-mean + uniform[-noise_scale, noise_scale] noise, then shuffle.

    Labels are laid out positives-first, shuffled with Fisher-Yates, and
    the features are drawn in the shuffled order so a prefix of the stream
    is itself a valid sample.
    """
    spec.validate()
    rng = SplitMix64(spec.seed)
    labels = [SPAMMER] * spec.n_positive + [LEGITIMATE] * (spec.n_total - spec.n_positive)
    rng.shuffle(labels)
    width = spec.dim
    examples = []
    for i, y in enumerate(labels):
        mean = spec.mean_pos if y == SPAMMER else spec.mean_neg
        feats = {j: mean[j] + rng.uniform(-spec.noise_scale, spec.noise_scale) for j in range(width)}
        examples.append(LabeledExample(f"{spec.name}-{i}", feats, y, spec.name))
    return ExampleStream(tuple(examples), spec.name, default_feature_names(width))


def flip_drift_specs(dim: int, n_per_class: int, separation: float, noise_scale: float,
                     seed: int = 0, spam_ratio: float = 0.5) -> tuple[SyntheticSpec, SyntheticSpec]:
    """Two phases whose class means swap sides: phase B's spammers look like phase A's legitimate users."""
    mean = tuple(separation / math.sqrt(dim) * (1.0 if j % 2 == 0 else -1.0) for j in range(dim))
    neg = tuple(-v for v in mean)
    a = SyntheticSpec(dim, n_per_class, mean, neg, noise_scale, spam_ratio, seed, "phase-A")
    b = SyntheticSpec(dim, n_per_class, neg, mean, noise_scale, spam_ratio, seed + 1, "phase-B")
    return a, b


# -- stream files -----------------------------------------------------------

def example_to_json(ex: LabeledExample) -> str:
    feats = {str(k): ex.features[k] for k in sorted(ex.features)}
    record = {"id": ex.id, "label": 1 if ex.label == SPAMMER else 0, "features": feats, "origin": ex.origin}
    return json.dumps(record, separators=(",", ":"))


def example_from_json(line: str) -> LabeledExample:
    record = json.loads(line)
    label = record["label"]
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    feats = {int(k): float(v) for k, v in record.get("features", {}).items()}
    return LabeledExample(str(record["id"]), feats, SPAMMER if label == 1 else LEGITIMATE,
                          str(record.get("origin", "")))


def write_stream(stream: ExampleStream, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in stream.examples:
            fh.write(example_to_json(ex))
            fh.write("\n")


def read_stream(path: str | Path, name: str | None = None, dim: int | None = None,
                feature_names: Iterable[str] | None = None) -> ExampleStream:
    """Read a JSON-lines stream file.

    The layout comes from ``feature_names`` if given, else ``dim``, else one
    past the largest index present in the file.
    """
    path = Path(path)
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                examples.append(example_from_json(line))
    if feature_names is not None:
        names = tuple(feature_names)
    else:
        if dim is None:
            dim = max((max(ex.features) + 1 for ex in examples if ex.features), default=0)
        names = default_feature_names(dim)
    return ExampleStream(tuple(examples), name or path.stem, names)


@dataclass
class OnlineStandardizer:
    """Running per-feature standardization (Welford).

    Each vector is transformed with the statistics of the vectors seen
    *before* it, then folded into them. Features with fewer than two
    observations or zero spread map to 0.
    """

    dim: int
    count: int = 0
    mean: np.ndarray = field(default=None)  # type: ignore[assignment]
    m2: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        if self.m2 is None:
            self.m2 = np.zeros(self.dim)

    def transform(self, x: np.ndarray) -> np.ndarray:
        if self.count < 2:
            return np.zeros(self.dim)
        std = np.sqrt(self.m2 / self.count)
        out = np.zeros(self.dim)
        ok = std > 0
        out[ok] = (x[ok] - self.mean[ok]) / std[ok]
        return out

    def observe(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def step(self, x: np.ndarray) -> np.ndarray:
        z = self.transform(x)
        self.observe(x)
        return z


def standardize_stream(stream: ExampleStream) -> ExampleStream:
    """Prequential standardization of a whole stream in its current order."""
    scaler = OnlineStandardizer(stream.dim)
    out = []
    for ex in stream.examples:
        z = scaler.step(ex.dense(stream.dim))
        feats = {int(j): float(z[j]) for j in np.flatnonzero(z)}
        out.append(LabeledExample(ex.id, feats, ex.label, ex.origin))
    return ExampleStream(tuple(out), stream.name, stream.feature_names)
