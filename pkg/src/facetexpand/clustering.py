"""Per-seed facet discovery: affinity propagation over skip-gram similarities."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import CorpusIndex, SkipGram, get_skipgrams
from .embeddings import EmbeddingTable, SgEmbedding, embed_skipgram
from .errors import DegenerateVectorError, NoEmbeddableContextError

COSINE = "cosine"
NEG_SQ_EUCLIDEAN = "neg_sq_euclidean"


@dataclass(frozen=True)
class ClusterConfig:
    metric: str = NEG_SQ_EUCLIDEAN
    preference: float | str = -60.0  # a number, or "median" of off-diagonal sims
    damping: float = 0.9
    max_iter: int = 1000
    stable_iters: int = 100
    max_contexts: int = 500
    noise_seed: int = 0
    include_stopword_contexts: bool = False

    def __post_init__(self):
        if self.metric not in (COSINE, NEG_SQ_EUCLIDEAN):
            raise ValueError(f"unknown metric {self.metric!r}")
        if not 0.5 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0.5, 1)")


@dataclass
class SimilarityGraph:
    n: int
    s: np.ndarray  # n x n, diagonal holds the preference
    preference: float


@dataclass
class APResult:
    exemplars: np.ndarray  # sorted node indices chosen as exemplars
    labels: np.ndarray  # node -> exemplar node index
    converged: bool
    iterations: int


@dataclass
class SkipGramCluster:
    """One candidate facet of one seed."""

    seed: str
    members: list[tuple[SkipGram, int, SgEmbedding]]
    exemplar: int  # index into members
    matrix: np.ndarray = field(init=False)  # d x m, columns are member embeddings

    def __post_init__(self):
        self.matrix = np.column_stack([emb.vector for _, _, emb in self.members])

    @property
    def total_count(self) -> int:
        return sum(count for _, count, _ in self.members)

    def __len__(self) -> int:
        return len(self.members)


def build_similarity(
    embeddings: Sequence[SgEmbedding],
    metric: str = NEG_SQ_EUCLIDEAN,
    preference: float = -60.0,
    labels: Sequence[str] | None = None,
) -> SimilarityGraph:
    n = len(embeddings)
    if n < 1:
        raise ValueError("need at least one embedding")
    X = np.stack([e.vector for e in embeddings])
    if metric == COSINE:
        norms = np.linalg.norm(X, axis=1)
        for i, nv in enumerate(norms):
            if nv == 0.0:
                name = labels[i] if labels is not None else f"#{i}"
                raise DegenerateVectorError(
                    f"zero-norm embedding for skip-gram {name}"
                )
        s = (X / norms[:, None]) @ (X / norms[:, None]).T
        np.clip(s, -1.0, 1.0, out=s)
    elif metric == NEG_SQ_EUCLIDEAN:
        sq = np.sum(X * X, axis=1)
        s = -(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T))
        np.fill_diagonal(s, 0.0)
        s = np.minimum(s, 0.0)
        s = (s + s.T) / 2.0  # exact symmetry despite rounding
    else:
        raise ValueError(f"unknown metric {metric!r}")
    np.fill_diagonal(s, preference)
    return SimilarityGraph(n=n, s=s, preference=preference)


def median_off_diagonal(s: np.ndarray) -> float:
    n = s.shape[0]
    if n == 1:
        return float(s[0, 0])
    mask = ~np.eye(n, dtype=bool)
    return float(np.median(s[mask]))


def affinity_propagation(
    graph: SimilarityGraph,
    damping: float = 0.9,
    max_iter: int = 1000,
    stable_iters: int = 100,
    noise_seed: int = 0,
) -> APResult:
    """Standard responsibility/availability message passing with damping.

    Terminates when the exemplar set is unchanged for `stable_iters`
    iterations; otherwise the last assignment is returned with
    converged=False.
    """
    n = graph.n
    if n == 1:
        return APResult(
            exemplars=np.array([0]),
            labels=np.array([0]),
            converged=True,
            iterations=0,
        )
    rng = np.random.default_rng(noise_seed)
    noise = rng.standard_normal((n, n))
    noise = (noise + noise.T) / 2.0
    # tiny symmetric relative noise breaks exact ties that cause oscillation
    S = graph.s + 1e-12 * np.abs(graph.s) * noise

    R = np.zeros((n, n))
    A = np.zeros((n, n))
    rows = np.arange(n)
    stable = 0
    prev_exemplars: np.ndarray | None = None
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        # responsibilities
        AS = A + S
        top = np.argmax(AS, axis=1)
        top_val = AS[rows, top]
        AS[rows, top] = -np.inf
        second_val = np.max(AS, axis=1)
        R_new = S - top_val[:, None]
        R_new[rows, top] = S[rows, top] - second_val
        R = damping * R + (1.0 - damping) * R_new

        # availabilities
        Rp = np.maximum(R, 0.0)
        Rp[rows, rows] = R[rows, rows]
        col_sum = np.sum(Rp, axis=0)
        A_new = col_sum[None, :] - Rp
        dA = A_new[rows, rows].copy()
        A_new = np.minimum(A_new, 0.0)
        A_new[rows, rows] = dA
        A = damping * A + (1.0 - damping) * A_new

        exemplars = np.flatnonzero(np.diag(A) + np.diag(R) > 0)
        if prev_exemplars is not None and np.array_equal(exemplars, prev_exemplars):
            stable += 1
        else:
            stable = 0
        prev_exemplars = exemplars
        if stable >= stable_iters and len(exemplars) > 0:
            converged = True
            break

    exemplars = np.flatnonzero(np.diag(A) + np.diag(R) > 0)
    if len(exemplars) == 0:
        exemplars = np.array([int(np.argmax(np.diag(A) + np.diag(R)))])
        converged = False

    # final refinement (as in the reference implementation): re-pick each
    # cluster's exemplar to maximize intra-cluster similarity, then reassign
    c = np.argmax(S[:, exemplars], axis=1)
    c[exemplars] = np.arange(len(exemplars))
    for k in range(len(exemplars)):
        members = np.flatnonzero(c == k)
        j = np.argmax(np.sum(S[members[:, None], members], axis=0))
        exemplars[k] = members[j]
    exemplars = np.sort(exemplars)
    labels = exemplars[np.argmax(S[:, exemplars], axis=1)]
    labels[exemplars] = exemplars
    return APResult(
        exemplars=exemplars, labels=labels, converged=converged, iterations=iteration
    )


def cluster_seed(
    index: CorpusIndex,
    table: EmbeddingTable,
    seed: str,
    config: ClusterConfig = ClusterConfig(),
) -> list[SkipGramCluster]:
    """Partition the embeddable skip-grams of one seed into facets."""
    pairs = get_skipgrams(index, seed)
    if not config.include_stopword_contexts:
        flags = {
            sg: flag for sg, flag in zip(index.skipgrams, index.stopword_only)
        }
        pairs = [(sg, c) for sg, c in pairs if not flags.get(sg, False)]
    pairs = pairs[: config.max_contexts]

    members = []
    for sg, count in pairs:
        emb = embed_skipgram(table, sg)
        if emb is not None:
            members.append((sg, count, emb))
    if not members:
        raise NoEmbeddableContextError(seed)

    graph = build_similarity(
        [emb for _, _, emb in members],
        metric=config.metric,
        preference=0.0,
        labels=[sg.canonical() for sg, _, _ in members],
    )
    if config.preference == "median":
        pref = median_off_diagonal(graph.s)
    else:
        pref = float(config.preference)
    np.fill_diagonal(graph.s, pref)
    graph.preference = pref

    result = affinity_propagation(
        graph,
        damping=config.damping,
        max_iter=config.max_iter,
        stable_iters=config.stable_iters,
        noise_seed=config.noise_seed,
    )
    clusters = []
    for ex in result.exemplars:
        idxs = [i for i in range(len(members)) if result.labels[i] == ex]
        clusters.append(
            SkipGramCluster(
                seed=seed,
                members=[members[i] for i in idxs],
                exemplar=idxs.index(int(ex)),
            )
        )
    clusters.sort(
        key=lambda c: (-c.total_count, c.members[c.exemplar][0].canonical())
    )
    return clusters
