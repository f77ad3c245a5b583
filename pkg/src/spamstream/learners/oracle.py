"""Brute-force reference solver for the Gaussian learners.

Each closed-form second-order update is the solution of a small
optimization problem over (mu, Sigma). This module solves those problems
numerically, from several random starting points, without using any of the
closed forms in :mod:`spamstream.learners.updates`. It is meant for tests at
d <= 3.

Sigma is parameterized by a lower-triangular Cholesky factor whose diagonal
is stored as a logarithm, so every iterate is positive definite. Problems:

``arow``   KL(N(mu,S) || N(mu_t,S_t)) + (1/2r) hinge(1 - y mu.x)^2 + (1/2r) x'Sx
``narow``  the ``arow`` problem with r = v/(b v - 1), v = x'S_t x (passive if v <= 1/b)
``cw``     KL  subject to  y mu.x >= phi sqrt(x'Sx)
``scw``    KL + C max(0, phi sqrt(x'Sx) - y mu.x)
``scw2``   KL + C max(0, phi sqrt(x'Sx) - y mu.x)^2
``nherd``  push-forward of N(mu_t,S_t) through the per-weight map
           w -> argmin_w' 1/2 (w'-w)' S_t^-1 (w'-w) + 1/(2 gamma) (1 - y w'.x)^2

The margin-triggered problems (arow, narow, nherd) are posed only when
y mu_t.x < 1; otherwise the state is returned unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.stats import norm

from .models import AlgorithmSpec, GaussianModelState

OBJECTIVE_TOL = 1e-6
MAX_DIM = 3


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstraintSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_algorithm(cls, spec: AlgorithmSpec) -> "ConstraintSpec":
        hp = spec.hyperparameters
        if spec.name == "arow":
            return cls("arow", {"r": hp["r"]})
        if spec.name == "narow":
            return cls("narow", {"b": hp["b"]})
        if spec.name in ("cw", "scw", "scw2"):
            params = {"phi": float(norm.ppf(hp["eta"]))}
            if spec.name != "cw":
                params["C"] = hp["C"]
            return cls(spec.name, params)
        if spec.name == "nherd":
            return cls("nherd", {"gamma": hp["gamma"]})
        raise ValueError(f"no defining problem registered for {spec.name}")


class _Problem:
    """KL divergence and its gradient in (mu, log-Cholesky) coordinates."""

    def __init__(self, mu_t: np.ndarray, sigma_t: np.ndarray) -> None:
        self.d = d = mu_t.shape[0]
        self.mu_t = mu_t
        self.prec = np.linalg.inv(sigma_t)
        self.prec = 0.5 * (self.prec + self.prec.T)
        self.logdet_t = float(np.linalg.slogdet(sigma_t)[1])
        self.rows, self.cols = np.tril_indices(d)
        self.diag_mask = self.rows == self.cols
        self.n_chol = self.rows.shape[0]

    def unpack(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = self.d
        mu = z[:d]
        theta = z[d:d + self.n_chol]
        L = np.zeros((d, d))
        L[self.rows, self.cols] = np.where(self.diag_mask, np.exp(theta), theta)
        return mu, L

    def pack(self, mu: np.ndarray, L: np.ndarray) -> np.ndarray:
        vals = L[self.rows, self.cols]
        theta = np.where(self.diag_mask, np.log(np.where(self.diag_mask, vals, 1.0)), vals)
        return np.concatenate([mu, theta])

    def chol_grad(self, G: np.ndarray, L: np.ndarray) -> np.ndarray:
        """Map a gradient w.r.t. L onto the log-Cholesky coordinates."""
        g = G[self.rows, self.cols]
        return np.where(self.diag_mask, g * L[self.rows, self.cols], g)

    def kl(self, mu: np.ndarray, L: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        diff = mu - self.mu_t
        PL = self.prec @ L
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        val = 0.5 * (self.logdet_t - logdet + float(np.sum(PL * L)) + float(diff @ self.prec @ diff) - self.d)
        g_mu = self.prec @ diff
        G = PL - np.diag(1.0 / np.diag(L))
        return val, g_mu, G


def _solve_unconstrained(fun, z0: np.ndarray):
    res = optimize.minimize(fun, z0, jac=True, method="BFGS", options={"gtol": 1e-11, "maxiter": 5000})
    grad_norm = float(np.max(np.abs(res.jac))) if res.jac is not None else math.inf
    return res.x, float(res.fun), grad_norm < 1e-7


def _kkt_residual(fun, z: np.ndarray, constraints) -> float:
    """Stationarity residual with non-negative multipliers on the active constraints."""
    grad = fun(z)[1]
    active = [c["jac"](z) for c in constraints if abs(c["fun"](z)) <= 1e-7]
    if not active:
        return float(np.max(np.abs(grad)))
    J = np.column_stack(active)
    _, resid = optimize.nnls(J, grad)
    return float(resid)


def _solve_constrained(fun, z0: np.ndarray, constraints):
    res = optimize.minimize(fun, z0, jac=True, method="SLSQP", constraints=constraints,
                            options={"ftol": 1e-15, "maxiter": 2000})
    # SLSQP often stops with "positive directional derivative" once it hits
    # the floating-point floor; accept those exits only if KKT holds.
    feasible = all(c["fun"](res.x) >= -1e-9 for c in constraints)
    ok = res.status in (0, 8) and feasible and _kkt_residual(fun, res.x, constraints) < 1e-6
    return res.x, float(res.fun), ok


def _starts(prob: _Problem, L_t: np.ndarray, restarts: int, rng: np.random.Generator, extra: int = 0):
    """Initial points: the prior itself, then random perturbations of it."""
    yield np.concatenate([prob.pack(prob.mu_t, L_t), np.zeros(extra)])
    for _ in range(restarts - 1):
        mu0 = prob.mu_t + rng.normal(scale=0.5, size=prob.d)
        L0 = L_t * np.exp(rng.normal(scale=0.3, size=(prob.d, prob.d)))
        L0 = np.tril(L0 + np.tril(rng.normal(scale=0.1, size=L0.shape), -1))
        yield np.concatenate([prob.pack(mu0, L0), np.abs(rng.normal(size=extra))])


def _gaussian_problem(kind: str, params: dict, prob: _Problem, x: np.ndarray, y: int):
    """Return (objective, constraints, n_slack) for the KL-based problems."""
    d = prob.d

    def split(z):
        mu, L = prob.unpack(z)
        return mu, L, z[d + prob.n_chol:]

    if kind == "arow":
        r = params["r"]

        def fun(z):
            mu, L, _ = split(z)
            val, g_mu, G = prob.kl(mu, L)
            h = max(0.0, 1.0 - y * float(mu @ x))
            s = L.T @ x
            val += (h * h + float(s @ s)) / (2.0 * r)
            g_mu = g_mu - (h / r) * y * x
            G = G + np.outer(x, s) / r
            return val, np.concatenate([g_mu, prob.chol_grad(G, L)])

        return fun, (), 0

    phi = params["phi"]
    if kind == "scw2":
        C = params["C"]

        def fun(z):
            mu, L, _ = split(z)
            val, g_mu, G = prob.kl(mu, L)
            s = L.T @ x
            ns = float(np.linalg.norm(s))
            h = max(0.0, phi * ns - y * float(mu @ x))
            val += C * h * h
            g_mu = g_mu - 2.0 * C * h * y * x
            G = G + 2.0 * C * h * phi * np.outer(x, s) / ns
            return val, np.concatenate([g_mu, prob.chol_grad(G, L)])

        return fun, (), 0

    def margin_gap(z):
        mu, L, _ = split(z)
        return y * float(mu @ x) - phi * float(np.linalg.norm(L.T @ x))

    def margin_gap_jac(z):
        mu, L, _ = split(z)
        s = L.T @ x
        G = -phi * np.outer(x, s) / float(np.linalg.norm(s))
        return np.concatenate([y * x, prob.chol_grad(G, L), np.zeros(z.shape[0] - d - prob.n_chol)])

    if kind == "cw":
        def fun(z):
            mu, L, _ = split(z)
            val, g_mu, G = prob.kl(mu, L)
            return val, np.concatenate([g_mu, prob.chol_grad(G, L)])

        cons = ({"type": "ineq", "fun": margin_gap, "jac": margin_gap_jac},)
        return fun, cons, 0

    if kind == "scw":
        C = params["C"]
        n = d + prob.n_chol

        def fun(z):
            mu, L, xi = split(z)
            val, g_mu, G = prob.kl(mu, L)
            return val + C * float(xi[0]), np.concatenate([g_mu, prob.chol_grad(G, L), [C]])

        cons = (
            {"type": "ineq", "fun": lambda z: margin_gap(z) + z[n],
             "jac": lambda z: margin_gap_jac(z) + np.eye(1, n + 1, n)[0]},
            {"type": "ineq", "fun": lambda z: z[n], "jac": lambda z: np.eye(1, n + 1, n)[0]},
        )
        return fun, cons, 1

    raise ValueError(f"unknown constraint kind {kind!r}")


def _collect(candidates: list[tuple[np.ndarray, float]], tol: float) -> np.ndarray:
    if not candidates:
        raise OracleError("oracle did not converge")
    best = min(candidates, key=lambda c: c[1])
    for z, val in candidates:
        if abs(val - best[1]) > tol:
            raise OracleError("oracle did not converge: restarts disagree on the objective")
    return best[0]


def _herding_oracle(state: GaussianModelState, x, y, gamma, restarts, rng):
    prec = np.linalg.inv(state.sigma)
    L_t = np.linalg.cholesky(state.sigma)
    d = state.dim

    def per_weight(w):
        def fun(wp):
            diff = wp - w
            h = 1.0 - y * float(wp @ x)
            val = 0.5 * float(diff @ prec @ diff) + h * h / (2.0 * gamma)
            return val, prec @ diff - (h / gamma) * y * x

        sols = []
        for k in range(restarts):
            w0 = w if k == 0 else w + rng.normal(size=d)
            wp, val, ok = _solve_unconstrained(fun, w0)
            if ok:
                sols.append((wp, val))
        return _collect(sols, OBJECTIVE_TOL)

    center = per_weight(state.mu)
    cols = [per_weight(state.mu + L_t[:, i]) - center for i in range(d)]
    AL = np.column_stack(cols)
    return center, AL @ AL.T


def kl_projection_oracle(state: GaussianModelState, x, y: int, constraint: ConstraintSpec,
                         restarts: int = 3, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Numerically solve ``constraint``'s defining problem from ``state``.

    Raises :class:`OracleError` if no restart converges or the converged
    restarts disagree on the optimal objective by more than ``OBJECTIVE_TOL``.
    """
    if state.diagonal:
        raise ValueError("oracle needs a full covariance")
    d = state.dim
    if d > MAX_DIM:
        raise ValueError(f"oracle is brute force; d must be <= {MAX_DIM}")
    x = np.asarray(x, dtype=float)
    mu_t = state.mu.copy()
    sigma_t = 0.5 * (state.sigma + state.sigma.T)
    rng = np.random.default_rng(seed)
    kind, params = constraint.kind, dict(constraint.params)

    if kind in ("arow", "narow", "nherd") and y * float(mu_t @ x) >= 1.0:
        return mu_t, sigma_t.copy()
    if kind == "narow":
        v = float(x @ sigma_t @ x)
        b = params["b"]
        if v <= 1.0 / b:
            return mu_t, sigma_t.copy()
        kind, params = "arow", {"r": v / (b * v - 1.0)}
    if kind == "nherd":
        return _herding_oracle(state, x, y, params["gamma"], restarts, rng)

    prob = _Problem(mu_t, sigma_t)
    L_t = np.linalg.cholesky(sigma_t)
    fun, cons, n_slack = _gaussian_problem(kind, params, prob, x, y)
    candidates = []
    for z0 in _starts(prob, L_t, restarts, rng, n_slack):
        if cons:
            z, val, ok = _solve_constrained(fun, z0, cons)
        else:
            z, val, ok = _solve_unconstrained(fun, z0)
        if ok:
            candidates.append((z, val))
    z = _collect(candidates, OBJECTIVE_TOL)
    mu, L = prob.unpack(z)
    return mu, L @ L.T
