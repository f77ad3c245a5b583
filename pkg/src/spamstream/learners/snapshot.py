"""Flat ``key=value`` text snapshots of a learner.

Floats are written with ``repr`` so a snapshot round-trips exactly::

    algorithm=scw
    covariance=full
    hp.C=1.0
    hp.a=1.0
    hp.eta=0.75
    dim=2
    step_count=10
    mistake_count=3
    update_count=4
    mu=0.25 -0.5
    sigma=0.5 0.0 0.0 1.0
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .models import AlgorithmSpec, FirstOrderModel, GaussianModelState, Model

_COUNTERS = ("step_count", "mistake_count", "update_count")


def _floats(arr: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(arr))


def dumps(spec: AlgorithmSpec, model: Model) -> str:
    lines = [f"algorithm={spec.name}", f"covariance={spec.covariance}"]
    lines += [f"hp.{k}={v!r}" for k, v in sorted(spec.hyperparameters.items())]
    lines.append(f"dim={model.dim}")
    lines += [f"{c}={getattr(model, c)}" for c in _COUNTERS]
    if isinstance(model, GaussianModelState):
        lines.append(f"mu={_floats(model.mu)}")
        lines.append(f"sigma_layout={'diag' if model.diagonal else 'full'}")
        lines.append(f"sigma={_floats(model.sigma)}")
    else:
        lines.append(f"w={_floats(model.w)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> tuple[AlgorithmSpec, Model]:
    fields: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed snapshot line: {line!r}")
        fields[key.strip()] = value.strip()
    hp = {k[3:]: float(v) for k, v in fields.items() if k.startswith("hp.")}
    spec = AlgorithmSpec(fields["algorithm"], hp, fields.get("covariance", "auto"))
    dim = int(fields["dim"])
    counters = {c: int(fields[c]) for c in _COUNTERS}

    def vec(key: str) -> np.ndarray:
        raw = fields[key]
        return np.array([float(t) for t in raw.split()]) if raw else np.zeros(0)

    if spec.second_order:
        sigma = vec("sigma")
        if fields.get("sigma_layout", "full") == "full":
            sigma = sigma.reshape(dim, dim)
        return spec, GaussianModelState(vec("mu"), sigma, **counters)
    return spec, FirstOrderModel(vec("w"), **counters)


def save(path: str | Path, spec: AlgorithmSpec, model: Model) -> None:
    Path(path).write_text(dumps(spec, model), encoding="utf-8")


def load(path: str | Path) -> tuple[AlgorithmSpec, Model]:
    return loads(Path(path).read_text(encoding="utf-8"))
