"""Oracle suites: check the implementations against independent references.

Run from the CLI as `facetexpand selftest`; the acceptance tests call the
same functions.
"""
from __future__ import annotations

import time

import numpy as np

from .clustering import SimilarityGraph, affinity_propagation
from .fusion import cluster_correlation, decide_from_correlations
from .oracles import best_exemplar_sets, max_cosine_correlation


def _planted_points(rng, max_n: int):
    """1-3 well-separated planted groups, one guaranteed point per group."""
    k = int(rng.integers(1, 4))
    while True:
        centers = rng.uniform(-12, 12, size=(k, 2))
        if all(
            np.linalg.norm(centers[a] - centers[b]) >= 8.0
            for a in range(k)
            for b in range(a + 1, k)
        ):
            break
    n = int(rng.integers(max(3, k), max_n + 1))
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    return centers[labels] + rng.normal(size=(n, 2)) * 0.4


def run_ap_oracle_suite(
    instances: int = 50, max_n: int = 8, seed: int = 12345, preference: float = -20.0
) -> dict:
    """Converged exemplar sets must be brute-force optima of net similarity."""
    rng = np.random.default_rng(seed)
    converged = 0
    mismatches = []
    start = time.perf_counter()
    for i in range(instances):
        points = _planted_points(rng, max_n)
        n = len(points)
        sq = np.sum(points * points, axis=1)
        s = -(sq[:, None] + sq[None, :] - 2.0 * points @ points.T)
        s = (s + s.T) / 2.0
        np.fill_diagonal(s, preference)
        result = affinity_propagation(
            SimilarityGraph(n=n, s=s, preference=preference), noise_seed=i
        )
        if not result.converged:
            continue
        converged += 1
        best, optima = best_exemplar_sets(s, tol=1e-6)
        if frozenset(int(e) for e in result.exemplars) not in optima:
            mismatches.append({"instance": i, "n": n, "optimum": best})
    return {
        "instances": instances,
        "converged": converged,
        "mismatches": mismatches,
        "elapsed_s": time.perf_counter() - start,
        "ok": converged > 0 and not mismatches,
    }


def run_cca_oracle_suite(pairs: int = 20, seed: int = 777, tol: float = 1e-4) -> dict:
    """cluster_correlation must match gradient-ascent maximization of the
    cosine objective, and hit the exact identical/orthogonal endpoints."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(pairs):
        # keep m + n <= d so the column spaces do not trivially intersect
        # (there the ridge-free objective degenerates to 1 at unbounded
        # coefficient norms, which no regularized solver should chase)
        d = int(rng.integers(6, 11))
        m = int(rng.integers(1, min(6, d // 2) + 1))
        n = int(rng.integers(1, min(6, d - m) + 1))
        X = rng.normal(size=(d, m))
        Y = rng.normal(size=(d, n))
        # near-zero ridge: the check is about the SVD solver, not about how
        # much a visible ridge biases weakly represented directions
        got = cluster_correlation(X, Y, ridge=1e-6).corr
        want = max_cosine_correlation(X, Y, seed=i)
        if abs(got - want) > tol:
            failures.append({"pair": i, "got": got, "oracle": want})

    x = np.array([[3.0], [4.0], [0.0]])
    identical = cluster_correlation(x, x.copy(), ridge=1e-6).corr
    e1 = np.array([[1.0], [0.0], [0.0]])
    e2 = np.array([[0.0], [1.0], [0.0]])
    orthogonal = cluster_correlation(e1, e2, ridge=1e-6).corr
    endpoint_ok = identical >= 1.0 - 1e-6 and orthogonal <= 1e-6
    return {
        "pairs": pairs,
        "failures": failures,
        "identical_corr": identical,
        "orthogonal_corr": orthogonal,
        "ok": not failures and endpoint_ok,
    }


def run_relevance_checks() -> dict:
    checks = {}
    equal = decide_from_correlations([0.4, 0.4, 0.4])
    checks["equal_correlations_rele_zero"] = equal.rele == 0.0
    sharp = decide_from_correlations([1.0, 0.0], tau=0.25, scale=3.0)
    flat = decide_from_correlations([1.0, 0.0], tau=0.25, scale=1.0)
    checks["above_threshold_matches"] = sharp.matched == 0 and sharp.rele > 0.25
    checks["below_threshold_rejected"] = flat.matched is None and flat.rele < 0.25
    return {"checks": checks, "ok": all(checks.values())}


def run_all() -> dict:
    report = {
        "affinity_propagation": run_ap_oracle_suite(),
        "cluster_correlation": run_cca_oracle_suite(),
        "relevance": run_relevance_checks(),
    }
    report["ok"] = all(section["ok"] for section in report.values())
    return report
