"""Brute-force reference implementations and equivalence suites.

These deliberately avoid the shortcuts used in :mod:`pvlab.rules` and
:mod:`pvlab.delegates` (sorted prefixes, sort-based projection, analytic
gradients) so that agreement between the two is meaningful.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import VisibleProfile
from .delegates import log_likelihood, log_likelihood_grad, simplex_project
from .rules import PhragmenState, phragmen_score, select_av, select_phragmen


def brute_phragmen_score(loads, approvers) -> tuple[float, frozenset[int]]:
    """Enumerate every non-empty subset of ``approvers``."""
    approvers = sorted(approvers)
    best, best_set = math.inf, frozenset()
    for size in range(1, len(approvers) + 1):
        for subset in itertools.combinations(approvers, size):
            score = (math.fsum(loads[n] for n in subset) + 1.0) / size
            if score < best:
                best, best_set = score, frozenset(subset)
    return best, best_set


def brute_phragmen(loads, approvals, n_alternatives: int) -> tuple[int, np.ndarray]:
    scores = []
    for j in range(n_alternatives):
        scores.append(brute_phragmen_score(loads, [n for n, a in enumerate(approvals) if j in a]))
    winner = min(range(n_alternatives), key=lambda j: (scores[j][0], j))
    new = np.array(loads, dtype=float)
    score, chosen = scores[winner]
    for n in chosen:
        new[n] = score
    return winner, new


def brute_av(approvals, n_alternatives: int) -> int:
    counts = [sum(1 for a in approvals if j in a) for j in range(n_alternatives)]
    return counts.index(max(counts))


def bisection_simplex_project(v, iters: int = 200) -> np.ndarray:
    """Find theta with sum(max(v - theta, 0)) = 1 by bisection."""
    v = np.asarray(v, dtype=float)
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0.0).sum() > 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0.0)


def finite_difference_grad(weights, threshold, X, y, h: float = 1e-6):
    weights = np.asarray(weights, dtype=float)
    gw = np.zeros_like(weights)
    for i in range(len(weights)):
        e = np.zeros_like(weights)
        e[i] = h
        gw[i] = (log_likelihood(weights + e, threshold, X, y) - log_likelihood(weights - e, threshold, X, y)) / (2 * h)
    gt = (log_likelihood(weights, threshold + h, X, y) - log_likelihood(weights, threshold - h, X, y)) / (2 * h)
    return gw, gt


def random_profile(rng: np.random.Generator, n_voters: int, n_alternatives: int, p: float = 0.4):
    return [frozenset(int(j) for j in np.flatnonzero(rng.random(n_alternatives) < p)) for _ in range(n_voters)]


@dataclass
class OracleResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_phragmen(n_instances: int = 1000, seed: int = 0, tol: float = 1e-12) -> OracleResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst, mismatches = 0.0, 0
    for _ in range(n_instances):
        n_voters = int(rng.integers(1, 7))
        m = int(rng.integers(1, 5))
        loads = rng.uniform(0.0, 2.0, n_voters)
        approvals = random_profile(rng, n_voters, m)
        for j in range(m):
            approvers = [n for n, a in enumerate(approvals) if j in a]
            if approvers:
                worst = max(worst, abs(phragmen_score(loads, approvers)[0] - brute_phragmen_score(loads, approvers)[0]))
        winner, state = select_phragmen(PhragmenState(loads), VisibleProfile.observed(approvals), m)
        ref_winner, ref_loads = brute_phragmen(loads, approvals, m)
        if winner != ref_winner or np.max(np.abs(state.loads - ref_loads)) > tol:
            mismatches += 1
    elapsed = time.perf_counter() - start
    passed = worst <= tol and mismatches == 0
    return OracleResult(
        "phragmen prefix vs subset enumeration",
        passed,
        f"{n_instances} instances, max score diff {worst:.2e}, winner/load mismatches {mismatches}",
        elapsed,
    )


def check_av(n_instances: int = 1000, seed: int = 1) -> OracleResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    bad = 0
    for _ in range(n_instances):
        n_voters, m = int(rng.integers(1, 8)), int(rng.integers(1, 6))
        approvals = random_profile(rng, n_voters, m)
        bad += select_av(VisibleProfile.observed(approvals), m) != brute_av(approvals, m)
    return OracleResult("approval voting vs direct count", bad == 0, f"{bad} mismatches", time.perf_counter() - start)


def check_projection(n_instances: int = 1000, seed: int = 2, tol: float = 1e-9) -> OracleResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(n_instances):
        v = rng.normal(0.0, 2.0, int(rng.integers(1, 10)))
        worst = max(worst, float(np.max(np.abs(simplex_project(v) - bisection_simplex_project(v)))))
    return OracleResult(
        "simplex projection vs bisection", worst <= tol, f"max diff {worst:.2e}", time.perf_counter() - start
    )


def check_gradient(n_instances: int = 100, seed: int = 3, rtol: float = 1e-4) -> OracleResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(n_instances):
        d, rows = 5, int(rng.integers(5, 60))
        X = rng.random((rows, d))
        y = (rng.random(rows) < 0.5).astype(float)
        w = rng.dirichlet(np.ones(d)) * rng.uniform(0.5, 5.0)
        tau = rng.uniform(-1.0, 2.0)
        gw, gt = log_likelihood_grad(w, tau, X, y)
        fw, ft = finite_difference_grad(w, tau, X, y)
        analytic, numeric = np.append(gw, gt), np.append(fw, ft)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)))
    return OracleResult(
        "log-likelihood gradient vs central differences",
        worst <= rtol,
        f"max relative error {worst:.2e}",
        time.perf_counter() - start,
    )


def run_all(seed: int = 0) -> list[OracleResult]:
    return [
        check_phragmen(seed=seed),
        check_av(seed=seed + 1),
        check_projection(seed=seed + 2),
        check_gradient(seed=seed + 3),
    ]
