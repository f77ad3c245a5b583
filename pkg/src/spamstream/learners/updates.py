"""Per-example update rules for the sixteen online learners.

Every rule receives the model, its ``AlgorithmSpec``, a dense example ``x``, its label
``y`` and the pre-update score, mutates the model in place and returns
``(loss, step_size)``. A zero step size means the model was left untouched.

Second-order rules share the notation ``m = y * mu.x`` (signed margin) and
``v = x' Sigma x`` (margin variance).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

from .models import (
    AlgorithmSpec,
    CovarianceDegenerate,
    FirstOrderModel,
    GaussianModelState,
    Model,
    UpdateOutcome,
    as_dense,
    sign_label,
)
from .probit import probit

# Smallest admissible margin variance; anything below is a loss of definiteness.
VARIANCE_FLOOR = 1e-12

Rule = Callable[[Model, AlgorithmSpec, np.ndarray, int, float], tuple[float, float]]


@lru_cache(maxsize=64)
def _phi(eta: float) -> float:
    return probit(eta)


def _is_zero(x: np.ndarray) -> bool:
    return not np.any(x)


# -- first order ------------------------------------------------------------

def _perceptron(model: FirstOrderModel, spec, x, y, score):
    loss = max(0.0, -y * score)
    if y * score > 0 or _is_zero(x):
        return loss, 0.0
    model.w = model.w + y * x
    return loss, 1.0


def _romma_step(model: FirstOrderModel, x, y, score, target):
    w = model.w
    xx = float(x @ x)
    ww = float(w @ w)
    if ww == 0.0:
        model.w = (y / xx) * x
        return 1.0 / xx
    denom = xx * ww - score * score
    if denom <= 1e-12 * xx * ww:
        # x is parallel to w: the two-constraint relaxation collapses
        if y * score > 0:
            t = target / (y * score)
            model.w = t * w
            return t - 1.0
        model.w = (y / xx) * x
        return 1.0 / xx
    c = (xx * ww - y * score) / denom
    d = ww * (y - score) / denom
    model.w = c * w + d * x
    return d


def _romma(model, spec, x, y, score):
    loss = max(0.0, -y * score)
    if y * score > 0 or _is_zero(x):
        return loss, 0.0
    return loss, _romma_step(model, x, y, score, 1.0)


def _aromma(model, spec, x, y, score):
    loss = max(0.0, 1.0 - y * score)
    if y * score >= 1 or _is_zero(x):
        return loss, 0.0
    return loss, _romma_step(model, x, y, score, 1.0)


def _alma(model: FirstOrderModel, spec, x, y, score):
    # p = 2 norm; examples are normalized to the unit sphere
    norm = float(np.linalg.norm(x))
    k = model.update_count + 1
    threshold = (1.0 - spec["alpha"]) * spec["B"] / math.sqrt(k)
    if norm == 0.0:
        return threshold, 0.0
    margin = y * score / norm
    loss = max(0.0, threshold - margin)
    if margin > threshold:
        return loss, 0.0
    eta = spec["C"] / math.sqrt(k)
    w = model.w + (eta * y / norm) * x
    wn = float(np.linalg.norm(w))
    if wn > 1.0:
        w = w / wn
    model.w = w
    return loss, eta


def _ogd(model: FirstOrderModel, spec, x, y, score):
    loss = max(0.0, 1.0 - y * score)
    if loss == 0.0 or _is_zero(x):
        return loss, 0.0
    eta = spec["eta"] / math.sqrt(model.step_count)
    model.w = model.w + eta * y * x
    return loss, eta


def _pa_family(variant: str) -> Rule:
    def rule(model: FirstOrderModel, spec, x, y, score):
        loss = max(0.0, 1.0 - y * score)
        xx = float(x @ x)
        if loss == 0.0 or xx == 0.0:
            return loss, 0.0
        if variant == "pa":
            tau = loss / xx
        elif variant == "pa1":
            tau = min(spec["C"], loss / xx)
        else:
            tau = loss / (xx + 1.0 / (2.0 * spec["C"]))
        model.w = model.w + tau * y * x
        return loss, tau

    rule.__name__ = f"_{variant}"
    return rule


# -- second order -----------------------------------------------------------

def _sigma_x(model: GaussianModelState, x: np.ndarray) -> np.ndarray:
    return model.sigma * x if model.diagonal else model.sigma @ x


def _variance(x: np.ndarray, sx: np.ndarray) -> float:
    v = float(x @ sx)
    if not math.isfinite(v) or v < VARIANCE_FLOOR:
        raise CovarianceDegenerate(f"v = {v!r}")
    return v


def _apply(model: GaussianModelState, sx: np.ndarray, mean_step: float, beta: float,
           scale: float = 1.0) -> None:
    """mu += mean_step * sx;  sigma <- scale * (sigma - beta * sx sx')."""
    mu = model.mu + mean_step * sx
    if model.diagonal:
        sigma = model.sigma - beta * sx * sx
    else:
        sigma = model.sigma - beta * np.outer(sx, sx)
        sigma = 0.5 * (sigma + sigma.T)
    if scale != 1.0:
        sigma = scale * sigma
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
        raise CovarianceDegenerate("non-finite parameters after update")
    model.mu = mu
    model.sigma = sigma


def _arow_step(model, x, y, m, r):
    sx = _sigma_x(model, x)
    v = _variance(x, sx)
    beta = 1.0 / (v + r)
    alpha = (1.0 - m) * beta
    _apply(model, sx, alpha * y, beta)
    return alpha


def _arow(model, spec, x, y, score):
    m = y * score
    loss = max(0.0, 1.0 - m)
    if loss == 0.0 or _is_zero(x):
        return loss, 0.0
    return loss, _arow_step(model, x, y, m, spec["r"])


def narow_r(v: float, b: float) -> float:
    """Adaptive AROW regularizer; infinite (no update) when v <= 1/b."""
    return v / (b * v - 1.0) if v > 1.0 / b else math.inf


def _narow(model, spec, x, y, score):
    m = y * score
    loss = max(0.0, 1.0 - m)
    if loss == 0.0 or _is_zero(x):
        return loss, 0.0
    sx = _sigma_x(model, x)
    v = _variance(x, sx)
    r = narow_r(v, spec["b"])
    if math.isinf(r):
        return loss, 0.0
    beta = 1.0 / (v + r)
    alpha = loss * beta
    _apply(model, sx, alpha * y, beta)
    return loss, alpha


def confidence_beta(alpha: float, v: float, phi: float) -> float:
    """Covariance step shared by CW and SCW for a given mean step ``alpha``."""
    avp = alpha * v * phi
    sqrt_u = 0.5 * (-avp + math.sqrt(avp * avp + 4.0 * v))
    return alpha * phi / (sqrt_u + avp)


def cw_alpha(m: float, v: float, phi: float) -> float:
    psi = 1.0 + phi * phi / 2.0
    zeta = 1.0 + phi * phi
    num = -m * psi + math.sqrt(m * m * phi ** 4 / 4.0 + v * phi * phi * zeta)
    return max(0.0, num / (v * zeta))


def scw2_alpha(m: float, v: float, phi: float, C: float) -> float:
    n = v + 1.0 / (2.0 * C)
    gamma = phi * math.sqrt(phi * phi * m * m * v * v + 4.0 * n * v * (n + v * phi * phi))
    return max(0.0, (-(2.0 * m * n + phi * phi * m * v) + gamma) / (2.0 * (n * n + n * v * phi * phi)))


def _confidence_family(variant: str) -> Rule:
    def rule(model: GaussianModelState, spec, x, y, score):
        if _is_zero(x):
            return 0.0, 0.0
        phi = _phi(spec["eta"])
        m = y * score
        sx = _sigma_x(model, x)
        v = _variance(x, sx)
        loss = max(0.0, phi * math.sqrt(v) - m)
        if loss == 0.0:
            return loss, 0.0
        if variant == "cw":
            alpha = cw_alpha(m, v, phi)
        elif variant == "scw":
            alpha = min(spec["C"], cw_alpha(m, v, phi))
        else:
            alpha = scw2_alpha(m, v, phi, spec["C"])
        if alpha == 0.0:
            return loss, 0.0
        _apply(model, sx, alpha * y, confidence_beta(alpha, v, phi))
        return loss, alpha

    rule.__name__ = f"_{variant}"
    return rule


def _nherd(model, spec, x, y, score):
    m = y * score
    loss = max(0.0, 1.0 - m)
    if loss == 0.0 or _is_zero(x):
        return loss, 0.0
    gamma = spec["gamma"]
    sx = _sigma_x(model, x)
    v = _variance(x, sx)
    alpha = loss / (v + gamma)
    # (I - c Sigma x x') Sigma (I - c x x' Sigma) with c = 1/(v + gamma)
    beta = (v + 2.0 * gamma) / (v + gamma) ** 2
    _apply(model, sx, alpha * y, beta)
    return loss, alpha


def _sop(model, spec, x, y, score):
    # sigma holds the inverse of the regularized correlation matrix of past
    # mistakes; mu = sigma @ (sum of y x over mistakes)
    loss = max(0.0, -y * score)
    if y * score > 0 or _is_zero(x):
        return loss, 0.0
    sx = _sigma_x(model, x)
    v = _variance(x, sx)
    step = (y - score) / (1.0 + v)
    _apply(model, sx, step, 1.0 / (1.0 + v))
    return loss, abs(step)


def _iellip(model, spec, x, y, score):
    loss = max(0.0, -y * score)
    if y * score > 0 or _is_zero(x):
        return loss, 0.0
    sx = _sigma_x(model, x)
    v = _variance(x, sx)
    m = y * score
    c_t = spec["c"] * spec["b"] ** model.update_count
    # mean moves along Sigma x / sqrt(v) far enough to restore unit margin
    alpha = (1.0 - m) / math.sqrt(v)
    _apply(model, sx, alpha * y / math.sqrt(v), c_t / v, scale=1.0 / (1.0 - c_t))
    return loss, alpha


RULES: dict[str, Rule] = {
    "perceptron": _perceptron,
    "romma": _romma,
    "aromma": _aromma,
    "alma": _alma,
    "ogd": _ogd,
    "pa": _pa_family("pa"),
    "pa1": _pa_family("pa1"),
    "pa2": _pa_family("pa2"),
    "sop": _sop,
    "iellip": _iellip,
    "cw": _confidence_family("cw"),
    "nherd": _nherd,
    "arow": _arow,
    "narow": _narow,
    "scw": _confidence_family("scw"),
    "scw2": _confidence_family("scw2"),
}


def update(model: Model, spec: AlgorithmSpec, x, y: int) -> UpdateOutcome:
    """Test-then-train step: score with the current model, then apply the rule."""
    if y not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {y!r}")
    x = as_dense(x, model.dim)
    score = float(model.weights @ x)
    prediction = sign_label(score)
    mistake = prediction != y
    model.step_count += 1
    if mistake:
        model.mistake_count += 1
    loss, step = RULES[spec.name](model, spec, x, y, score)
    changed = step != 0.0
    if changed:
        model.update_count += 1
    return UpdateOutcome(prediction, mistake, loss, step if changed else 0.0, changed)
