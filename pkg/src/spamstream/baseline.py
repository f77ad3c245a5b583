"""Batch stand-in learner and the train-once / retrain-per-interval protocols.

The batch learner is L2-regularized logistic regression fit by full-batch
proximal gradient descent from a zero start. It plays the role a random
forest would: a model frozen between refits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .stream import ExampleStream, LabeledExample

DEFAULT_REG = 1e-4
DEFAULT_EPOCHS = 500
DEFAULT_LR = 0.1
DEFAULT_TOL = 1e-8

SUBSTITUTION_NOTE = "batch baselines use L2 logistic regression in place of a random forest"


class BaselinePolicy(enum.Enum):
    TRAIN_ONCE = "train_once"
    RETRAIN_EACH_INTERVAL = "retrain_each_interval"

    @classmethod
    def parse(cls, value: "BaselinePolicy | str") -> "BaselinePolicy":
        if isinstance(value, cls):
            return value
        aliases = {"rf1": cls.TRAIN_ONCE, "rf-1": cls.TRAIN_ONCE,
                   "rf2": cls.RETRAIN_EACH_INTERVAL, "rf-2": cls.RETRAIN_EACH_INTERVAL}
        key = str(value).lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown baseline: {value}") from None


@dataclass(frozen=True)
class FitConfig:
    reg: float = DEFAULT_REG
    epochs: int = DEFAULT_EPOCHS
    lr: float = DEFAULT_LR
    tol: float = DEFAULT_TOL


@dataclass(frozen=True)
class BatchModel:
    w: np.ndarray
    bias: float
    trained_on: tuple[int, int]  # half-open part-index range
    single_class: bool = False
    epochs_run: int = 0

    def scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.w + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        # ties go to -1, as for the online learners
        return np.where(self.scores(X) > 0, 1, -1)


def _as_arrays(examples, dim: int | None) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(examples, ExampleStream):
        return examples.matrix()
    examples = list(examples)
    if dim is None:
        dim = max((max(ex.features) + 1 for ex in examples if ex.features), default=0)
    X = np.zeros((len(examples), dim))
    for i, ex in enumerate(examples):
        for idx, value in ex.features.items():
            X[i, idx] = value
    return X, np.array([ex.label for ex in examples], dtype=int)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_arrays(X: np.ndarray, y: np.ndarray, config: FitConfig = FitConfig(),
               trained_on: tuple[int, int] = (0, 1)) -> BatchModel:
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot fit on zero examples")
    w = np.zeros(d)
    b = 0.0
    epochs_run = 0
    for epoch in range(config.epochs):
        margins = y * (X @ w + b)
        # d/dz log(1 + exp(-z)) = -sigmoid(-z)
        coef = -y * _sigmoid(-margins) / n
        g_w = X.T @ coef
        g_b = float(coef.sum())
        full = np.append(g_w + config.reg * w, g_b)
        if float(np.linalg.norm(full)) < config.tol:
            break
        # proximal step on the L2 term keeps large reg stable
        w = (w - config.lr * g_w) / (1.0 + config.lr * config.reg)
        b -= config.lr * g_b
        epochs_run = epoch + 1
    single = len(np.unique(y)) < 2
    return BatchModel(w, b, trained_on, single, epochs_run)


def fit_batch(examples: ExampleStream | Sequence[LabeledExample], reg: float = DEFAULT_REG,
              epochs: int = DEFAULT_EPOCHS, lr: float = DEFAULT_LR, *, dim: int | None = None,
              tol: float = DEFAULT_TOL, trained_on: tuple[int, int] = (0, 1)) -> BatchModel:
    if reg <= 0 or lr <= 0 or epochs < 0:
        raise ValueError("reg and lr must be positive, epochs non-negative")
    X, y = _as_arrays(examples, dim)
    return fit_arrays(X, y, FitConfig(reg, epochs, lr, tol), trained_on)


@dataclass
class BaselineRun:
    """Predictions for parts 2..n, concatenated in part order."""

    policy: BaselinePolicy
    predictions: np.ndarray
    labels: np.ndarray
    part_sizes: list[int]
    models: list[BatchModel] = field(default_factory=list)

    @property
    def n_fits(self) -> int:
        return len(self.models)

    @property
    def skipped(self) -> int:
        """Examples in part 1, which a baseline never predicts."""
        return self.part_sizes[0]


def run_policy(parts: Sequence[ExampleStream], policy: BaselinePolicy | str,
               config: FitConfig = FitConfig()) -> BaselineRun:
    policy = BaselinePolicy.parse(policy)
    if len(parts) < 2:
        raise ValueError("baseline protocols need at least 2 parts")
    arrays = [p.matrix() for p in parts]
    preds, labels, models = [], [], []
    if policy is BaselinePolicy.TRAIN_ONCE:
        model = fit_arrays(*arrays[0], config, (0, 1))
        models.append(model)
        for X, y in arrays[1:]:
            preds.append(model.predict(X))
            labels.append(y)
    else:
        for k in range(1, len(arrays)):
            model = fit_arrays(*arrays[k - 1], config, (k - 1, k))
            models.append(model)
            X, y = arrays[k]
            preds.append(model.predict(X))
            labels.append(y)
    return BaselineRun(policy, np.concatenate(preds), np.concatenate(labels),
                       [len(p) for p in parts], models)
