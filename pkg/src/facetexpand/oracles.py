"""Independent brute-force / numerical oracles used by tests and `selftest`.

Nothing here shares code with the implementations it checks: the exemplar
oracle enumerates subsets, and the correlation oracle climbs the raw
objective by projected gradient ascent.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np


def net_similarity(s: np.ndarray, exemplars: tuple[int, ...]) -> float:
    """Sum of preferences of exemplars plus best-exemplar similarity of the rest."""
    total = 0.0
    ex = list(exemplars)
    for k in ex:
        total += s[k, k]
    for i in range(s.shape[0]):
        if i in exemplars:
            continue
        total += max(s[i, k] for k in ex)
    return total


def best_exemplar_sets(s: np.ndarray, tol: float = 1e-9):
    """All exemplar subsets within tol of the maximal net similarity.

    Exponential in n; intended for n <= 10.
    """
    n = s.shape[0]
    scored = []
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            scored.append((net_similarity(s, subset), frozenset(subset)))
    best = max(v for v, _ in scored)
    return best, [subset for v, subset in scored if v >= best - tol]


def _cosine(X, Y, a, b) -> float:
    u = X @ a
    v = Y @ b
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


def max_cosine_correlation(
    X: np.ndarray,
    Y: np.ndarray,
    restarts: int = 20,
    iters: int = 5000,
    seed: int = 0,
) -> float:
    """Maximize cos(Xa, Yb) over coefficient vectors a, b by gradient ascent.

    Projected ascent with backtracking: after each gradient step a and b are
    rescaled so u = Xa and v = Yb stay unit length; the step size halves
    whenever the objective drops and grows after accepted steps.
    """
    d, m = X.shape
    _, n = Y.shape
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        a = rng.standard_normal(m)
        b = rng.standard_normal(n)
        if np.linalg.norm(X @ a) == 0.0 or np.linalg.norm(Y @ b) == 0.0:
            continue
        a = a / np.linalg.norm(X @ a)
        b = b / np.linalg.norm(Y @ b)
        f = abs(_cosine(X, Y, a, b))
        step = 1.0
        for _ in range(iters):
            u = X @ a
            v = Y @ b
            nu = np.linalg.norm(u)
            nv = np.linalg.norm(v)
            cur = float(u @ v) / (nu * nv)
            ga = X.T @ (v / (nu * nv) - cur * u / (nu * nu))
            gb = Y.T @ (u / (nu * nv) - cur * v / (nv * nv))
            gnorm = np.linalg.norm(ga) + np.linalg.norm(gb)
            if gnorm < 1e-14 or step < 1e-14:
                break
            a_try = a + step * ga
            b_try = b + step * gb
            na = np.linalg.norm(X @ a_try)
            nb = np.linalg.norm(Y @ b_try)
            if na == 0.0 or nb == 0.0:
                step *= 0.5
                continue
            a_try = a_try / na
            b_try = b_try / nb
            f_try = _cosine(X, Y, a_try, b_try)
            if abs(f_try) > abs(cur):
                a, b = a_try, b_try
                f = abs(f_try)
                step = min(step * 1.5, 10.0)
            else:
                step *= 0.5
        best = max(best, f)
    return best
