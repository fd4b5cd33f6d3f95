"""Cross-seed facet fusion.

A facet of one seed is matched into another seed's facets by the top
canonical correlation between their skip-gram embedding matrices, turned
into a relevance score (KL divergence of the softmaxed correlation profile
from uniform). Matched clusters are unioned; the fold over seeds keeps
only facets every seed shares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clustering import SkipGramCluster
from .corpus import SkipGram
from .embeddings import SgEmbedding
from .errors import NoCoherentFacetError


@dataclass(frozen=True)
class FusionConfig:
    tau: float = 0.25  # relevance-score threshold
    tau_raw: float = 0.5  # raw-correlation fallback when the other seed has 1 cluster
    ridge: float = 1e-3  # relative ridge on within-set covariances
    softmax_scale: float = 10.0  # correlation-to-logit scale; 1.0 = raw softmax
    center: bool = False  # subtract the mean column before correlating


@dataclass
class CcaResult:
    corr: float
    a: np.ndarray
    b: np.ndarray
    u: np.ndarray
    v: np.ndarray


def _inv_sqrt(C: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(C)
    evals = np.maximum(evals, np.finfo(float).tiny)
    return evecs @ ((1.0 / np.sqrt(evals))[:, None] * evecs.T)


def cluster_correlation(
    X: np.ndarray, Y: np.ndarray, ridge: float = 1e-3, center: bool = False
) -> CcaResult:
    """Top canonical correlation between the column spaces of X and Y.

    Solves max cos(Xa, Yb) with ridge-regularized unit-norm constraints via
    the SVD of (X'X+eI)^{-1/2} X'Y (Y'Y+eI)^{-1/2}. The ridge is relative:
    each side gets ridge * trace-mean of its within-set covariance. The
    reported corr is the top singular value; it approaches the cosine of
    the sense vectors u = Xa and v = Yb as the ridge vanishes, but unlike
    the raw cosine it stays small when only a weakly supported direction
    (e.g. a noise subspace) lines up across the two sets.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2:
        raise ValueError("cluster matrices must be 2-D (columns are embeddings)")
    if X.shape[0] != Y.shape[0]:
        raise ValueError(
            f"embedding dimension mismatch: {X.shape[0]} vs {Y.shape[0]}"
        )
    if ridge <= 0:
        raise ValueError("ridge must be positive")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValueError("cluster matrices must be finite")
    if center:
        X = X - X.mean(axis=1, keepdims=True)
        Y = Y - Y.mean(axis=1, keepdims=True)

    m, n = X.shape[1], Y.shape[1]
    Cxx = X.T @ X
    Cyy = Y.T @ Y
    eps_x = ridge * max(np.trace(Cxx) / m, np.finfo(float).tiny)
    eps_y = ridge * max(np.trace(Cyy) / n, np.finfo(float).tiny)
    isx = _inv_sqrt(Cxx + eps_x * np.eye(m))
    isy = _inv_sqrt(Cyy + eps_y * np.eye(n))
    M = isx @ (X.T @ Y) @ isy
    U, svals, Vt = np.linalg.svd(M)
    a = isx @ U[:, 0]
    b = isy @ Vt[0, :]
    u = X @ a
    v = Y @ b
    if float(u @ v) < 0:  # sign of b is arbitrary; orient the sense vectors together
        b, v = -b, -v
    corr = min(max(float(svals[0]), 0.0), 1.0)
    return CcaResult(corr=corr, a=a, b=b, u=u, v=v)


def softmax(values: np.ndarray) -> np.ndarray:
    z = np.asarray(values, dtype=np.float64)
    z = z - np.max(z)
    e = np.exp(z)
    return e / np.sum(e)


def kl_to_uniform(p: np.ndarray) -> float:
    """D_KL(p || U_t) in nats; 0 exactly for the uniform distribution."""
    t = len(p)
    total = sum(pi * math.log(pi * t) for pi in p if pi > 0.0)
    return max(0.0, float(total))  # rounding may dip a hair below zero


@dataclass
class RelevanceDecision:
    correlations: np.ndarray
    softmaxed: np.ndarray
    rele: float
    matched: int | None
    fallback: bool = False  # single-cluster raw-correlation path taken


def decide_from_correlations(
    corrs: Sequence[float],
    tau: float = 0.25,
    tau_raw: float = 0.5,
    scale: float = 1.0,
) -> RelevanceDecision:
    corrs = np.asarray(corrs, dtype=np.float64)
    t = len(corrs)
    if t == 1:
        # softmax over one value is degenerate (rele is identically 0), so
        # fall back to the raw correlation
        matched = 0 if corrs[0] >= tau_raw else None
        return RelevanceDecision(
            correlations=corrs,
            softmaxed=np.array([1.0]),
            rele=0.0,
            matched=matched,
            fallback=True,
        )
    p = softmax(scale * corrs)
    rele = 0.0 if np.all(corrs == corrs[0]) else kl_to_uniform(p)
    matched = int(np.argmax(corrs)) if rele > tau else None
    return RelevanceDecision(
        correlations=corrs, softmaxed=p, rele=rele, matched=matched
    )


def relevance(
    A1: np.ndarray,
    B_clusters: Sequence[np.ndarray],
    tau: float = 0.25,
    tau_raw: float = 0.5,
    ridge: float = 1e-3,
    scale: float = 1.0,
    center: bool = False,
) -> RelevanceDecision:
    """Match one reference cluster into the other seed's clusters."""
    if not B_clusters:
        raise ValueError("B_clusters must be non-empty")
    corrs = [
        cluster_correlation(A1, B, ridge=ridge, center=center).corr
        for B in B_clusters
    ]
    return decide_from_correlations(corrs, tau=tau, tau_raw=tau_raw, scale=scale)


@dataclass
class CoherentFacet:
    """A fused skip-gram cluster shared by every seed processed so far."""

    members: list[tuple[str, SkipGram, int, SgEmbedding]]  # (seed, sg, count, emb)
    seeds_covered: set[str] = field(default_factory=set)

    @property
    def matrix(self) -> np.ndarray:
        return np.column_stack([emb.vector for _, _, _, emb in self.members])

    @property
    def total_count(self) -> int:
        return sum(count for _, _, count, _ in self.members)

    def skipgram_strings(self) -> list[str]:
        seen = {}
        for _, sg, _, _ in self.members:
            seen.setdefault(sg.canonical(), None)
        return list(seen)


def lift_cluster(cluster: SkipGramCluster) -> CoherentFacet:
    return CoherentFacet(
        members=[
            (cluster.seed, sg, count, emb) for sg, count, emb in cluster.members
        ],
        seeds_covered={cluster.seed},
    )


def fuse_pair(
    ref: list[CoherentFacet],
    cur: list[SkipGramCluster],
    config: FusionConfig = FusionConfig(),
    diagnostics: list | None = None,
) -> list[CoherentFacet]:
    """Match each reference facet into the current seed's clusters.

    Unmatched reference facets are dropped; one current cluster may be
    claimed by several reference facets.
    """
    if not ref or not cur:
        raise ValueError("both facet lists must be non-empty")
    cur_matrices = [c.matrix for c in cur]
    fused = []
    for i, facet in enumerate(ref):
        decision = relevance(
            facet.matrix,
            cur_matrices,
            tau=config.tau,
            tau_raw=config.tau_raw,
            ridge=config.ridge,
            scale=config.softmax_scale,
            center=config.center,
        )
        if diagnostics is not None:
            diagnostics.append(
                {
                    "ref_facet": i,
                    "ref_seeds": sorted(facet.seeds_covered),
                    "cur_seed": cur[0].seed,
                    "correlations": [float(c) for c in decision.correlations],
                    "softmaxed": [float(p) for p in decision.softmaxed],
                    "rele": decision.rele,
                    "matched": decision.matched,
                    "fallback": decision.fallback,
                }
            )
        if decision.matched is None:
            continue
        matched = cur[decision.matched]
        fused.append(
            CoherentFacet(
                members=facet.members
                + [(matched.seed, sg, count, emb) for sg, count, emb in matched.members],
                seeds_covered=facet.seeds_covered | {matched.seed},
            )
        )
    return fused


def fuse_all(
    per_seed_clusters: list[tuple[str, list[SkipGramCluster]]],
    config: FusionConfig = FusionConfig(),
    diagnostics: list | None = None,
) -> list[CoherentFacet]:
    """Left fold of fuse_pair over seeds in input order."""
    if not per_seed_clusters:
        raise ValueError("need at least one seed")
    collected = [] if diagnostics is None else diagnostics
    _, first_clusters = per_seed_clusters[0]
    facets = [lift_cluster(c) for c in first_clusters]
    for seed, clusters in per_seed_clusters[1:]:
        facets = fuse_pair(facets, clusters, config=config, diagnostics=collected)
        if not facets:
            raise NoCoherentFacetError(collected)
    return facets
