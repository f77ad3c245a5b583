"""Prequential runs, baseline scoring and the four experiment drivers."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..baseline import BaselinePolicy, FitConfig, run_policy
from ..features.extract import set_blocks, stream_from_blocks
from ..features.lexicon import LexiconResources
from ..features.records import UserRecord
from ..features.registry import ABLATION_COMBOS, parse_combo
from ..learners.models import ALGORITHMS, AlgorithmSpec, UpdateOutcome, init_model
from ..learners.updates import update
from ..stream import (
    ExampleStream,
    compose_drift,
    concat_streams,
    split_into_parts,
    standardize_stream,
)

DEFAULT_CHECKPOINTS: tuple[int, ...] = tuple(range(5, 101, 5))
DEFAULT_N_PARTS = 20
ABLATION_ALGORITHMS = ("scw", "alma")


def validate_checkpoints(checkpoints: Iterable[float]) -> tuple[float, ...]:
    pcts = tuple(checkpoints)
    if not pcts:
        raise ValueError("checkpoints must be non-empty")
    for p in pcts:
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0 < p <= 100:
            raise ValueError(f"checkpoint {p!r} outside (0, 100]")
    if any(b <= a for a, b in zip(pcts, pcts[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    return pcts


def checkpoint_position(pct: float, n: int) -> int:
    """Examples seen at ``pct`` percent of an ``n``-example stream: ceil(pct * n / 100)."""
    return math.ceil(Fraction(str(pct)) * n / 100)


@dataclass(frozen=True)
class Phase:
    name: str
    start: int
    length: int


@dataclass(frozen=True)
class Checkpoint:
    phase: str
    pct: float
    seen: int
    mistakes: int

    @property
    def error(self) -> float:
        return self.mistakes / self.seen


@dataclass(frozen=True)
class RunResult:
    run_id: str
    algorithm: str
    feature_set: str
    stream: str
    checkpoints: tuple[Checkpoint, ...]
    mistakes: int
    seen: int
    wall_clock: float = field(default=0.0, compare=False)
    kind: str = "online"  # or "baseline"
    skipped: int = 0  # leading examples a baseline never predicts

    @property
    def final_error(self) -> float:
        return self.mistakes / self.seen if self.seen else float("nan")

    def series(self, phase: Optional[str] = None) -> list[float]:
        return [c.error for c in self.checkpoints if phase is None or c.phase == phase]


class RunAborted(RuntimeError):
    def __init__(self, run_id: str, index: int, cause: Exception) -> None:
        super().__init__(f"run {run_id} aborted at example {index}: {cause}")
        self.run_id = run_id
        self.index = index
        self.cause = cause


def make_run_id(algorithm: str, feature_set: str, stream: str) -> str:
    return f"{algorithm}/{feature_set or '-'}/{stream}"


def _checkpoints(mistake_flags: np.ndarray, phases: Sequence[Phase], pcts, skipped: int = 0
                 ) -> tuple[Checkpoint, ...]:
    """Cumulative counts at each phase checkpoint.

    ``mistake_flags`` covers stream positions ``skipped..n-1``; checkpoint
    positions are global, so a baseline's seen count at position ``p`` is
    ``p - skipped``. Positions with nothing seen yet are left out.
    """
    cum = np.concatenate([[0], np.cumsum(mistake_flags, dtype=np.int64)])
    out = []
    for phase in phases:
        for pct in pcts:
            pos = phase.start + checkpoint_position(pct, phase.length)
            seen = pos - skipped
            if seen <= 0:
                continue
            out.append(Checkpoint(phase.name, pct, seen, int(cum[seen])))
    return tuple(out)


def _single_phase(stream: ExampleStream) -> list[Phase]:
    return [Phase("all", 0, len(stream))]


def run_prequential(stream: ExampleStream, spec: AlgorithmSpec | str,
                    checkpoints: Sequence[float] = DEFAULT_CHECKPOINTS, *,
                    phases: Optional[Sequence[Phase]] = None, feature_set: str = "",
                    run_id: Optional[str] = None,
                    on_step: Optional[Callable[[int, UpdateOutcome], None]] = None) -> RunResult:
    """Test-then-train over ``stream``: each example is scored by the model as
    it stood before that example, then used to update it."""
    if len(stream) == 0:
        raise ValueError("empty stream")
    spec = spec if isinstance(spec, AlgorithmSpec) else AlgorithmSpec(spec)
    pcts = validate_checkpoints(checkpoints)
    phases = list(phases) if phases is not None else _single_phase(stream)
    run_id = run_id or make_run_id(spec.name, feature_set, stream.name)
    X, y = stream.matrix()
    model = init_model(spec, stream.dim)
    flags = np.zeros(len(y), dtype=bool)
    started = time.perf_counter()
    for i in range(len(y)):
        try:
            outcome = update(model, spec, X[i], int(y[i]))
        except (ArithmeticError, ValueError) as exc:
            raise RunAborted(run_id, i, exc) from exc
        flags[i] = outcome.was_mistake
        if on_step is not None:
            on_step(i, outcome)
    elapsed = time.perf_counter() - started
    return RunResult(run_id, spec.name, feature_set, stream.name,
                     _checkpoints(flags, phases, pcts), int(flags.sum()), len(y), elapsed)


def score_baseline(parts: Sequence[ExampleStream], policy: BaselinePolicy | str,
                   checkpoints: Sequence[float] = DEFAULT_CHECKPOINTS, *,
                   phases: Optional[Sequence[Phase]] = None, feature_set: str = "",
                   stream_name: str = "", config: FitConfig = FitConfig()) -> RunResult:
    """Cumulative error of a batch protocol over parts 2..n, on the online grid."""
    policy = BaselinePolicy.parse(policy)
    pcts = validate_checkpoints(checkpoints)
    n = sum(len(p) for p in parts)
    phases = list(phases) if phases is not None else [Phase("all", 0, n)]
    started = time.perf_counter()
    run = run_policy(parts, policy, config)
    flags = run.predictions != run.labels
    elapsed = time.perf_counter() - started
    run_id = make_run_id(policy.value, feature_set, stream_name)
    return RunResult(run_id, policy.value, feature_set, stream_name,
                     _checkpoints(flags, phases, pcts, run.skipped), int(flags.sum()),
                     len(flags), elapsed, "baseline", run.skipped)


# -- experiment plumbing -------------------------------------------------------

@dataclass(frozen=True)
class PreparedStream:
    """A shuffled, optionally standardized stream, its parts and its phases."""

    stream: ExampleStream
    parts: tuple[ExampleStream, ...]
    phases: tuple[Phase, ...]


def _reslice(stream: ExampleStream, sizes: Sequence[int]) -> list[ExampleStream]:
    out, pos = [], 0
    for k, size in enumerate(sizes):
        out.append(ExampleStream(stream.examples[pos:pos + size], f"{stream.name}[{k}]",
                                 stream.feature_names))
        pos += size
    return out


def prepare_single(stream: ExampleStream, n_parts: int = DEFAULT_N_PARTS, seed: int = 0,
                   standardize: bool = True) -> PreparedStream:
    parts = split_into_parts(stream, n_parts, seed).parts(stream)
    joined = concat_streams(parts, stream.name)
    if standardize:
        joined = standardize_stream(joined)
    parts = _reslice(joined, [len(p) for p in parts])
    return PreparedStream(joined, tuple(parts), (Phase("all", 0, len(joined)),))


def prepare_drift(a: ExampleStream, b: ExampleStream, n_parts: int = DEFAULT_N_PARTS,
                  seed: int = 0, standardize: bool = True) -> PreparedStream:
    """Each phase is split into ``n_parts`` on its own; all of A's parts come first.

    Standardization runs over the composed stream in consumption order, so
    phase B is scaled with statistics that still include phase A.
    """
    if a.feature_names != b.feature_names:
        raise ValueError("layout mismatch")
    parts_a = split_into_parts(a, n_parts, seed).parts(a)
    parts_b = split_into_parts(b, n_parts, seed).parts(b)
    joined = compose_drift(concat_streams(parts_a, a.name), concat_streams(parts_b, b.name))
    if standardize:
        joined = standardize_stream(joined)
    parts = _reslice(joined, [len(p) for p in parts_a + parts_b])
    phases = (Phase("A", 0, len(a)), Phase("B", len(a), len(b)))
    return PreparedStream(joined, tuple(parts), phases)


@dataclass(frozen=True)
class _Job:
    kind: str  # "online" | "baseline"
    prepared: PreparedStream
    target: object  # AlgorithmSpec or BaselinePolicy
    checkpoints: tuple[float, ...]
    feature_set: str
    fit: FitConfig


def _execute(job: _Job) -> RunResult:
    p = job.prepared
    if job.kind == "online":
        return run_prequential(p.stream, job.target, job.checkpoints, phases=p.phases,
                               feature_set=job.feature_set)
    return score_baseline(p.parts, job.target, job.checkpoints, phases=p.phases,
                          feature_set=job.feature_set, stream_name=p.stream.name, config=job.fit)


def _run_jobs(jobs: Sequence[_Job], workers: int) -> list[RunResult]:
    # results come back in submission order whatever the worker count
    if workers <= 1 or len(jobs) <= 1:
        return [_execute(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute, jobs))


def _specs(specs) -> list[AlgorithmSpec]:
    return [s if isinstance(s, AlgorithmSpec) else AlgorithmSpec(s) for s in specs]


def _jobs(prepared: PreparedStream, specs, baselines, checkpoints, feature_set: str,
          fit: FitConfig) -> list[_Job]:
    pcts = validate_checkpoints(checkpoints)
    jobs = [_Job("online", prepared, s, pcts, feature_set, fit) for s in _specs(specs)]
    jobs += [_Job("baseline", prepared, BaselinePolicy.parse(b), pcts, feature_set, fit)
             for b in baselines]
    return jobs


def run_single_dataset(stream: ExampleStream, specs, baselines=(), *,
                       checkpoints: Sequence[float] = DEFAULT_CHECKPOINTS,
                       n_parts: int = DEFAULT_N_PARTS, seed: int = 0, standardize: bool = True,
                       feature_set: str = "", fit: FitConfig = FitConfig(),
                       workers: int = 1) -> list[RunResult]:
    prepared = prepare_single(stream, n_parts, seed, standardize)
    return _run_jobs(_jobs(prepared, specs, baselines, checkpoints, feature_set, fit), workers)


def run_drift_experiment(a: ExampleStream, b: ExampleStream, specs, baselines=(), *,
                         checkpoints: Sequence[float] = DEFAULT_CHECKPOINTS,
                         n_parts: int = DEFAULT_N_PARTS, seed: int = 0, standardize: bool = True,
                         feature_set: str = "", fit: FitConfig = FitConfig(),
                         workers: int = 1) -> list[RunResult]:
    """Phase A then phase B. Checkpoints are placed within each phase; the error
    at every checkpoint is cumulative from the first example of the stream."""
    prepared = prepare_drift(a, b, n_parts, seed, standardize)
    return _run_jobs(_jobs(prepared, specs, baselines, checkpoints, feature_set, fit), workers)


def run_comparison(a: ExampleStream, b: Optional[ExampleStream] = None, baselines=(),
                   **kwargs) -> list[RunResult]:
    """All sixteen learners at their defaults, on one stream or a drift pair."""
    if b is None:
        return run_single_dataset(a, ALGORITHMS, baselines, **kwargs)
    return run_drift_experiment(a, b, ALGORITHMS, baselines, **kwargs)


def run_ablation(users: Sequence[UserRecord], specs=ABLATION_ALGORITHMS,
                 combos: Sequence[str] = ABLATION_COMBOS, *,
                 users_b: Optional[Sequence[UserRecord]] = None,
                 lex: Optional[LexiconResources] = None,
                 checkpoints: Sequence[float] = DEFAULT_CHECKPOINTS,
                 n_parts: int = DEFAULT_N_PARTS, seed: int = 0, standardize: bool = True,
                 name: str = "records", name_b: str = "records-b",
                 workers: int = 1) -> list[RunResult]:
    """Re-extract features for every combination and run each learner on them.

    The shuffle depends only on the stream length and seed, so every
    combination sees the users in the same order.
    """
    specs = _specs(specs)
    needed = sorted({s for c in combos for s in parse_combo(c)})
    blocks_a = set_blocks(users, needed, lex)
    blocks_b = set_blocks(users_b, needed, lex) if users_b is not None else None
    jobs: list[_Job] = []
    for combo in combos:
        label = "+".join(parse_combo(combo)) if combo not in ABLATION_COMBOS else combo
        a = stream_from_blocks(users, blocks_a, combo, name)
        if users_b is None:
            prepared = prepare_single(a, n_parts, seed, standardize)
        else:
            b = stream_from_blocks(users_b, blocks_b, combo, name_b)
            prepared = prepare_drift(a, b, n_parts, seed, standardize)
        jobs += _jobs(prepared, specs, (), checkpoints, label, FitConfig())
    return _run_jobs(jobs, workers)
