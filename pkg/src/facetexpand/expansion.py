"""Per-facet candidate scoring and ranking.

Each facet's skip-grams are fired against a scoring backend that returns a
per-skip-gram distribution over slot candidates; a candidate's weight is
the sum of its scores over the facet's skip-grams. The built-in backend
scores from corpus co-occurrence; the sidecar backend queries a masked
language model over the wire protocol.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .clustering import cluster_seed
from .config import CORPUS_SCORER, RunConfig
from .corpus import SLOT, CorpusIndex, SkipGram
from .errors import EmptyExpansionError
from .fusion import CoherentFacet, fuse_all
from .sidecar_client import WIRE_SLOT, SidecarClient

INDEX_SCOPE = "index"
SCORER_SCOPE = "scorer"


@dataclass(frozen=True)
class ScoreRequest:
    skipgrams: tuple[str, ...]  # canonical forms with the slot marker
    scope: str = INDEX_SCOPE
    top_k: int = 200

    def __post_init__(self):
        if not self.skipgrams:
            raise ValueError("request needs at least one skip-gram")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.scope not in (INDEX_SCOPE, SCORER_SCOPE):
            raise ValueError(f"unknown candidate scope {self.scope!r}")


@dataclass
class ScoreMatrix:
    """Sparse (candidate, skip-gram) -> score map, keyed per skip-gram."""

    columns: dict[str, dict[str, float]] = field(default_factory=dict)

    def weights(self) -> dict[str, float]:
        totals: dict[str, float] = {}
        for col in self.columns.values():
            for cand, score in col.items():
                totals[cand] = totals.get(cand, 0.0) + score
        return totals


class CorpusScorer:
    """Scores candidates by normalized co-occurrence counts in the index."""

    name = "corpus"

    def __init__(self, index: CorpusIndex):
        self.index = index
        self._sg_ids = {
            sg.canonical(): i for i, sg in enumerate(index.skipgrams)
        }

    def score(self, request: ScoreRequest) -> ScoreMatrix:
        matrix = ScoreMatrix()
        for sg_text in request.skipgrams:
            sid = self._sg_ids.get(sg_text)
            if sid is None:
                continue
            counts = self.index.sg_to_entity[sid]
            total = sum(counts.values())
            if total == 0:
                continue
            matrix.columns[sg_text] = {
                self.index.entities[eid]: count / total
                for eid, count in counts.items()
            }
        return matrix


class SidecarScorer:
    """Scores candidates through the external masked-language-model sidecar."""

    def __init__(self, client: SidecarClient):
        self.client = client
        self.name = f"mlm:{client.model_name}"

    def score(self, request: ScoreRequest) -> ScoreMatrix:
        texts = [
            sg.replace(SLOT, WIRE_SLOT, 1) for sg in request.skipgrams
        ]
        replies = self.client.score_batch(texts, top_k=request.top_k)
        matrix = ScoreMatrix()
        for sg_text, tokens in zip(request.skipgrams, replies):
            if tokens:
                matrix.columns[sg_text] = {tok: prob for tok, prob in tokens}
        return matrix


def score_corpus(index: CorpusIndex, request: ScoreRequest) -> ScoreMatrix:
    return CorpusScorer(index).score(request)


def score_mlm(client: SidecarClient, request: ScoreRequest) -> ScoreMatrix:
    return SidecarScorer(client).score(request)


@dataclass
class FacetExpansion:
    facet_id: int
    entities: list[tuple[str, float]]  # descending weight
    scorer: str
    skipgram_count: int


def expand_facet(
    facet: CoherentFacet,
    scorer,
    seeds: set[str],
    n: int = 20,
    facet_id: int = 0,
    index: CorpusIndex | None = None,
    scope: str = INDEX_SCOPE,
    top_k: int = 200,
    frequency_weighted: bool = False,
) -> FacetExpansion:
    """Rank candidates for one facet by summed per-skip-gram scores.

    Each distinct skip-gram contributes once; with frequency_weighted its
    column is scaled by the facet's occurrence count for that skip-gram.
    Ties break by higher corpus frequency, then lexicographically.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sg_counts: dict[str, int] = {}
    for _, sg, count, _ in facet.members:
        key = sg.canonical()
        sg_counts[key] = sg_counts.get(key, 0) + count

    request = ScoreRequest(
        skipgrams=tuple(sg_counts), scope=scope, top_k=top_k
    )
    matrix = scorer.score(request)
    weights: dict[str, float] = {}
    for sg_text, col in matrix.columns.items():
        factor = sg_counts[sg_text] if frequency_weighted else 1
        for cand, score in col.items():
            weights[cand] = weights.get(cand, 0.0) + factor * score

    def freq(entity: str) -> int:
        if index is not None and entity in index:
            return index.frequency(entity)
        return 0

    ranked = [
        (entity, weight)
        for entity, weight in weights.items()
        if weight > 0.0
        and entity not in seeds
        and (scope != INDEX_SCOPE or index is None or entity in index)
    ]
    if not ranked:
        raise EmptyExpansionError(f"no candidate scored for facet {facet_id}")
    ranked.sort(key=lambda ew: (-ew[1], -freq(ew[0]), ew[0]))
    return FacetExpansion(
        facet_id=facet_id,
        entities=ranked[:n],
        scorer=scorer.name,
        skipgram_count=len(sg_counts),
    )


def expand_query(
    query: list[str],
    index: CorpusIndex,
    table,
    config: RunConfig = RunConfig(),
    scorer=None,
    diagnostics: list | None = None,
) -> list[FacetExpansion]:
    """Full pipeline: cluster each seed, fuse facets across seeds, expand.

    Facets come out ordered by descending total skip-gram count. Results do
    not depend on the thread count: per-seed clustering is collected in
    query order.
    """
    if not query:
        raise ValueError("query needs at least one seed")
    cluster_cfg = config.cluster_config()
    threads = config.threads if config.threads > 0 else None
    if threads == 1 or len(query) == 1:
        per_seed = [
            (seed, cluster_seed(index, table, seed, cluster_cfg)) for seed in query
        ]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(cluster_seed, index, table, seed, cluster_cfg)
                for seed in query
            ]
            per_seed = [(seed, f.result()) for seed, f in zip(query, futures)]

    facets = fuse_all(per_seed, config.fusion_config(), diagnostics=diagnostics)
    facets.sort(key=lambda f: (-f.total_count, f.skipgram_strings()[0]))

    if scorer is None:
        scorer = CorpusScorer(index)
    seeds = set(query)
    expansions = []
    for i, facet in enumerate(facets):
        expansions.append(
            expand_facet(
                facet,
                scorer,
                seeds,
                n=config.expansion_size,
                facet_id=i,
                index=index,
                top_k=config.top_k,
                frequency_weighted=config.frequency_weighted,
            )
        )
    return expansions


def expansions_to_json(query: list[str], expansions: list[FacetExpansion]) -> dict:
    return {
        "query": list(query),
        "facets": [
            {
                "id": e.facet_id,
                "skipgram_count": e.skipgram_count,
                "scorer": e.scorer,
                "entities": [[entity, weight] for entity, weight in e.entities],
            }
            for e in expansions
        ],
    }
