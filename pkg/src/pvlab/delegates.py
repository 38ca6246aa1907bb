"""Artificial delegates: per-voter preference models learned from past ballots.

A delegate fits a logistic model ``P(approve j) = sigmoid(<x_j, w> - tau)``
with ``w`` constrained to the probability simplex, by projected gradient
ascent on the log-likelihood of the voter's attended rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import expit

from .population import ThresholdMode, approve_from_utilities

LOG_CLAMP = 1e-12
LOG_FLOOR = float(np.log(LOG_CLAMP))
FALLBACK_THRESHOLD = 10.0


def _simplex_project(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = 0
    for k in range(u.shape[0]):
        if u[k] - css[k] / (k + 1) > 0:
            rho = k
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


_simplex_project_jit = numba.njit(cache=True)(_simplex_project)


def simplex_project(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{w >= 0, sum(w) = 1}`` (sort-and-threshold)."""
    return _simplex_project(np.asarray(v, dtype=float))


@dataclass
class TrainingSet:
    """Rows of (features, approved?) from the rounds a voter attended."""

    d: int
    _x: list = field(default_factory=list, repr=False)
    _y: list = field(default_factory=list, repr=False)

    def add_round(self, features: np.ndarray, approvals: frozenset[int]) -> None:
        features = np.asarray(features, dtype=float)
        if features.shape[1] != self.d:
            raise ValueError(f"expected {self.d} features, got {features.shape[1]}")
        self._x.append(features)
        self._y.append(np.array([j in approvals for j in range(features.shape[0])], dtype=float))

    @property
    def X(self) -> np.ndarray:
        if not self._x:
            return np.empty((0, self.d))
        return np.concatenate(self._x)

    @property
    def y(self) -> np.ndarray:
        if not self._y:
            return np.empty(0)
        return np.concatenate(self._y)

    @property
    def n_rounds(self) -> int:
        return len(self._x)

    def __len__(self) -> int:
        return sum(len(y) for y in self._y)


@dataclass(frozen=True)
class LearnerConfig:
    max_iters: int = 500
    grad_tol: float = 1e-6
    refit_every_absence: bool = True
    learn_sharpness: bool = True


@dataclass(frozen=True)
class LearnedPreference:
    weights_hat: np.ndarray
    threshold_hat: float
    converged: bool
    final_objective: float
    # True when fit() took the empty/single-class shortcut
    fallback: bool = False
    sharpness: float = 1.0
    # objective after each accepted iteration, starting from the initial point
    objective_trace: np.ndarray | None = field(default=None, repr=False)



def log_likelihood(weights, threshold: float, X: np.ndarray, y: np.ndarray) -> float:
    """Logistic log-likelihood of labels ``y`` under ``sigmoid(X @ weights - threshold)``.

    Probabilities are clamped below at 1e-12 before taking logs, so perfectly
    separated data yields a finite objective.
    """
    if len(y) == 0:
        return 0.0
    p = expit(np.asarray(X) @ np.asarray(weights, dtype=float) - threshold)
    y = np.asarray(y, dtype=float)
    return float(
        np.sum(y * np.log(np.maximum(p, LOG_CLAMP)) + (1 - y) * np.log(np.maximum(1 - p, LOG_CLAMP)))
    )


def log_likelihood_grad(weights, threshold: float, X: np.ndarray, y: np.ndarray):
    """Gradient of :func:`log_likelihood` w.r.t. ``(weights, threshold)``."""
    residual = y - expit(X @ weights - threshold)
    return X.T @ residual, -float(residual.sum())


def _fallback(y: np.ndarray, d: int) -> LearnedPreference:
    threshold = -FALLBACK_THRESHOLD if len(y) and np.all(y == 1) else FALLBACK_THRESHOLD
    return LearnedPreference(np.full(d, 1.0 / d), threshold, True, 0.0, fallback=True)


@numba.njit(cache=True)
def _objective(A, theta, y, z):
    # fills z = A @ theta and returns the clamped log-likelihood
    n, k = A.shape
    total = 0.0
    for i in range(n):
        zi = 0.0
        for j in range(k):
            zi += A[i, j] * theta[j]
        z[i] = zi
        if zi >= 0:
            log_p = -np.log1p(np.exp(-zi))
            log_q = log_p - zi
        else:
            log_q = -np.log1p(np.exp(zi))
            log_p = log_q + zi
        if y[i] > 0.5:
            total += max(log_p, LOG_FLOOR)
        else:
            total += max(log_q, LOG_FLOOR)
    return total


@numba.njit(cache=True)
def _project(theta, d, cone):
    out = theta.copy()
    if cone:
        for j in range(d):
            out[j] = max(out[j], 0.0)
    else:
        out[:d] = _simplex_project_jit(theta[:d])
    return out


@numba.njit(cache=True)
def _ascend(A, y, theta, d, cone, max_iters, grad_tol):
    n, k = A.shape
    z = np.empty(n)
    z_new = np.empty(n)
    grad = np.empty(k)
    obj = _objective(A, theta, y, z)
    trace = np.empty(max_iters + 1)
    trace[0] = obj
    accepted = 0
    step = 1.0
    converged = False
    for _ in range(max_iters):
        grad[:] = 0.0
        for i in range(n):
            r = y[i] - 1.0 / (1.0 + np.exp(-z[i]))
            for j in range(k):
                grad[j] += A[i, j] * r
        # gradient mapping at unit step measures stationarity on the feasible set
        mapped = _project(theta + grad, d, cone) - theta
        if np.sqrt(np.sum(mapped * mapped)) < grad_tol:
            converged = True
            break
        step *= 2.0
        while True:
            trial = _project(theta + step * grad, d, cone)
            delta = trial - theta
            sq = np.sum(delta * delta)
            if sq == 0.0:
                break
            obj_new = _objective(A, trial, y, z_new)
            # Armijo condition for the projected step (quadratic model)
            if obj_new >= obj + np.sum(grad * delta) - 0.5 / step * sq:
                break
            step *= 0.5
        if sq == 0.0:
            converged = True
            break
        theta = trial
        obj = obj_new
        z, z_new = z_new, z
        accepted += 1
        trace[accepted] = obj
    return theta, obj, converged, trace[: accepted + 1]


def fit(data: TrainingSet, config: LearnerConfig = LearnerConfig()) -> LearnedPreference:
    """Maximise the approval log-likelihood by projected gradient ascent.

    The model is ``sigmoid(s * (<x, w> - tau))`` with ``w`` on the simplex. With
    ``config.learn_sharpness`` the slope ``s > 0`` is fitted too, by working in
    the cone coordinates ``v = s * w >= 0``, ``c = s * tau`` where the problem
    stays concave; otherwise ``s = 1`` and ``w`` is projected onto the simplex.

    Starts from uniform weights, zero threshold and unit slope. Each iteration
    takes a gradient step, projects, and backtracks until the Armijo
    sufficient-increase condition holds. Stops when the projected-gradient norm
    drops below ``config.grad_tol`` or after ``config.max_iters`` iterations.

    Empty or single-class data skips optimisation: all-approve data gives
    threshold -10 (approve everything), otherwise +10 (approve nothing).
    """
    X, y = data.X, data.y
    d = data.d
    if len(y) == 0 or np.all(y == y[0]):
        return _fallback(y, d)

    # augmented design so that z = A @ theta with theta = (v, c)
    A = np.ascontiguousarray(np.hstack([X, -np.ones((len(y), 1))]))
    theta0 = np.append(np.full(d, 1.0 / d), 0.0)
    theta, obj, converged, trace = _ascend(
        A, y, theta0, d, config.learn_sharpness, config.max_iters, config.grad_tol
    )
    v, c = theta[:d], float(theta[d])
    sharpness = float(v.sum())
    if sharpness <= 1e-12:
        # features carry no signal: a constant predictor on the sign of the intercept
        threshold = -FALLBACK_THRESHOLD if c <= 0 else FALLBACK_THRESHOLD
        return LearnedPreference(
            np.full(d, 1.0 / d), threshold, bool(converged), float(obj), sharpness=0.0, objective_trace=trace
        )
    return LearnedPreference(
        v / sharpness, c / sharpness, bool(converged), float(obj), sharpness=sharpness, objective_trace=trace
    )


def predict(
    pref: LearnedPreference,
    features: np.ndarray,
    threshold_mode: ThresholdMode | str = ThresholdMode.ABSOLUTE,
    margin: float | None = None,
) -> frozenset[int]:
    """Approval set the delegate casts over the rows of ``features``.

    In absolute mode this is ``{j : <x_j, w_hat> >= tau_hat}``. For the
    relative and mean threshold modes the population's ``margin`` is applied
    to the predicted utilities instead of the learned threshold. Fallback
    models always use their absolute threshold.
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != pref.weights_hat.shape[0]:
        raise ValueError(
            f"feature dimension {features.shape} does not match weights {pref.weights_hat.shape}"
        )
    utility = features @ pref.weights_hat
    mode = ThresholdMode(threshold_mode)
    if mode is ThresholdMode.ABSOLUTE or pref.fallback or margin is None:
        return frozenset(int(j) for j in np.flatnonzero(utility >= pref.threshold_hat))
    return approve_from_utilities(utility, margin, mode)
