"""Algorithm specs, model states, prediction and the hinge loss."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

FIRST_ORDER = ("perceptron", "romma", "aromma", "alma", "ogd", "pa", "pa1", "pa2")
SECOND_ORDER = ("sop", "iellip", "cw", "nherd", "arow", "narow", "scw", "scw2")
ALGORITHMS = FIRST_ORDER + SECOND_ORDER

# Full covariance up to this dimension, diagonal above it (unless forced).
FULL_COVARIANCE_MAX_DIM = 512

DEFAULTS: dict[str, dict[str, float]] = {
    "perceptron": {},
    "romma": {},
    "aromma": {},
    "alma": {"alpha": 0.9, "B": 1 / 0.9, "C": math.sqrt(2.0)},
    "ogd": {"eta": 0.5},
    "pa": {},
    "pa1": {"C": 1.0},
    "pa2": {"C": 1.0},
    "sop": {"a": 1.0},
    "iellip": {"a": 1.0, "b": 0.3, "c": 0.1},
    "cw": {"a": 1.0, "eta": 0.75},
    "nherd": {"a": 1.0, "gamma": 1.0},
    "arow": {"a": 1.0, "r": 1.0},
    "narow": {"a": 1.0, "b": 1.0},
    "scw": {"a": 1.0, "C": 1.0, "eta": 0.75},
    "scw2": {"a": 1.0, "C": 1.0, "eta": 0.75},
}

# Open/closed intervals each hyperparameter must lie in: (low, high, low_inclusive, high_inclusive)
_RANGES = {
    "alpha": (0.0, 1.0, False, True),
    "B": (0.0, math.inf, False, False),
    "C": (0.0, math.inf, False, False),
    "eta": (0.5, 1.0, False, False),
    "a": (0.0, math.inf, False, False),
    "r": (0.0, math.inf, False, False),
    "b": (0.0, math.inf, False, False),
    "c": (0.0, 1.0, False, False),
    "gamma": (0.0, math.inf, False, False),
}
# the OGD learning rate shares its name with the confidence level
_RANGES_BY_ALGORITHM = {("ogd", "eta"): (0.0, math.inf, False, False)}


class UnknownAlgorithm(ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown algorithm: {name}")
        self.name = name


class CovarianceDegenerate(ArithmeticError):
    def __init__(self, detail: str = "") -> None:
        super().__init__("covariance degenerate" + (f" ({detail})" if detail else ""))


def _in_range(name: str, key: str, value: float) -> bool:
    lo, hi, lo_inc, hi_inc = _RANGES_BY_ALGORITHM.get((name, key), _RANGES[key])
    above = value >= lo if lo_inc else value > lo
    below = value <= hi if hi_inc else value < hi
    return math.isfinite(value) and above and below


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    hyperparameters: Mapping[str, float] = field(default_factory=dict)
    covariance: str = "auto"  # "auto" | "full" | "diag"

    def __post_init__(self) -> None:
        name = self.name.lower()
        if name not in DEFAULTS:
            raise UnknownAlgorithm(self.name)
        merged = dict(DEFAULTS[name])
        for key, value in self.hyperparameters.items():
            if key not in merged:
                raise ValueError(f"{name} has no hyperparameter {key!r}")
            merged[key] = float(value)
        for key, value in merged.items():
            if not _in_range(name, key, value):
                raise ValueError(f"{name}: hyperparameter {key}={value} out of range")
        if self.covariance not in ("auto", "full", "diag"):
            raise ValueError(f"covariance must be auto, full or diag, got {self.covariance!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "hyperparameters", merged)

    @property
    def second_order(self) -> bool:
        return self.name in SECOND_ORDER

    def __getitem__(self, key: str) -> float:
        return self.hyperparameters[key]


@dataclass
class FirstOrderModel:
    w: np.ndarray
    step_count: int = 0
    mistake_count: int = 0
    update_count: int = 0

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.w


@dataclass
class GaussianModelState:
    """Gaussian belief N(mu, sigma) over the weight vector.

    ``sigma`` is a (d, d) matrix, or a length-d vector holding only the
    diagonal when the model runs in diagonal mode.
    """

    mu: np.ndarray
    sigma: np.ndarray
    step_count: int = 0
    mistake_count: int = 0
    update_count: int = 0

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def diagonal(self) -> bool:
        return self.sigma.ndim == 1

    @property
    def weights(self) -> np.ndarray:
        return self.mu

    def covariance(self) -> np.ndarray:
        return np.diag(self.sigma) if self.diagonal else self.sigma


Model = Union[FirstOrderModel, GaussianModelState]


@dataclass(frozen=True)
class UpdateOutcome:
    prediction: int
    was_mistake: bool
    loss: float
    step_size: float
    model_changed: bool


def init_model(spec: AlgorithmSpec, dim: int) -> Model:
    if not isinstance(dim, (int, np.integer)) or dim <= 0:
        raise ValueError("invalid dimension")
    if not spec.second_order:
        return FirstOrderModel(np.zeros(dim))
    a = spec.hyperparameters["a"]
    diagonal = spec.covariance == "diag" or (spec.covariance == "auto" and dim > FULL_COVARIANCE_MAX_DIM)
    sigma = np.full(dim, a) if diagonal else a * np.eye(dim)
    return GaussianModelState(np.zeros(dim), sigma)


def as_dense(x, dim: int) -> np.ndarray:
    """Accept a sparse ``{index: value}`` mapping or a dense array."""
    if isinstance(x, Mapping):
        out = np.zeros(dim)
        for idx, value in x.items():
            if idx < 0 or idx >= dim:
                raise ValueError("dimension overflow")
            out[idx] = value
        return out
    arr = np.asarray(x, dtype=float)
    if arr.shape != (dim,):
        raise ValueError("dimension overflow")
    return arr


def sign_label(score: float) -> int:
    # exact ties go to -1 (legitimate)
    return 1 if score > 0 else -1


def predict(model: Model, x) -> tuple[int, float]:
    score = float(model.weights @ as_dense(x, model.dim))
    return sign_label(score), score


def hinge_loss(w: np.ndarray, x, y: int, rho: float = 1.0) -> float:
    if rho < 0:
        raise ValueError("rho must be non-negative")
    w = np.asarray(w, dtype=float)
    return max(0.0, rho - y * float(w @ as_dense(x, w.shape[0])))
