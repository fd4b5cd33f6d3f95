"""Evaluation for the multi-list setting: AP@l, MMAP, PMAP, BMAP, facet-count distances.

MMAP is recall-like (how well the gold facets are covered by their
best-matching predictions), PMAP is precision-like (how good each
predicted facet's best gold match is), and BMAP is their per-query
harmonic mean. Best matches may be reused on both sides.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


class SchemaError(Exception):
    """A gold or prediction file violates the expected schema."""

    def __init__(self, pointer: str, reason: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {reason}")


def normalize_entity(entity: str) -> str:
    return entity.strip().lower().replace(" ", "_")


@dataclass
class GoldQuery:
    query_id: str
    seeds: list[str]
    facets: list[set[str]]  # unordered gold entity sets


@dataclass
class PredictedQuery:
    query_id: str
    facets: list[list[str]]  # ranked, duplicate-free entity lists


@dataclass
class QueryScores:
    query_id: str
    mmap: dict[int, float]
    pmap: dict[int, float]
    bmap: dict[int, float]
    gold_facets: int
    predicted_facets: int


@dataclass
class EvalReport:
    cutoffs: list[int]
    mmap: dict[int, float]
    pmap: dict[int, float]
    bmap: dict[int, float]
    l1_distance: float
    l2_distance: float
    per_query: list[QueryScores] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "cutoffs": self.cutoffs,
            "mmap": {str(l): v for l, v in self.mmap.items()},
            "pmap": {str(l): v for l, v in self.pmap.items()},
            "bmap": {str(l): v for l, v in self.bmap.items()},
            "facet_count_l1": self.l1_distance,
            "facet_count_l2": self.l2_distance,
            "per_query": [
                {
                    "query_id": q.query_id,
                    "mmap": {str(l): v for l, v in q.mmap.items()},
                    "pmap": {str(l): v for l, v in q.pmap.items()},
                    "bmap": {str(l): v for l, v in q.bmap.items()},
                    "gold_facets": q.gold_facets,
                    "predicted_facets": q.predicted_facets,
                }
                for q in self.per_query
            ],
        }

    def as_table(self) -> str:
        header = ["metric"] + [f"l={l}" for l in self.cutoffs]
        rows = [
            ["MMAP"] + [f"{self.mmap[l]:.4f}" for l in self.cutoffs],
            ["PMAP"] + [f"{self.pmap[l]:.4f}" for l in self.cutoffs],
            ["BMAP"] + [f"{self.bmap[l]:.4f}" for l in self.cutoffs],
        ]
        widths = [
            max(len(r[i]) for r in [header] + rows) for i in range(len(header))
        ]
        lines = [
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths))
            for row in [header] + rows
        ]
        lines.append("")
        lines.append(f"facet-count l1 = {self.l1_distance:g}")
        lines.append(f"facet-count l2 = {self.l2_distance:g}")
        return "\n".join(lines)


def ap_at_l(ranked: list[str], gold: set[str], l: int) -> float:
    """Average precision of the top-l ranked entities against an unordered set.

    Normalized by min(l, |gold|) so a perfect short list scores 1; lists
    shorter than l are truncated, not padded.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if not gold:
        raise ValueError("gold set must be non-empty")
    if not ranked:
        return 0.0
    hits = 0
    total = 0.0
    for k, entity in enumerate(ranked[:l], start=1):
        if entity in gold:
            hits += 1
            total += hits / k
    return total / min(l, len(gold))


def mmap(pred: PredictedQuery, gold: GoldQuery, l: int) -> float:
    if not pred.facets:
        return 0.0
    return sum(
        max(ap_at_l(bf, gm, l) for bf in pred.facets) for gm in gold.facets
    ) / len(gold.facets)


def _distinct(facets: list[list[str]]) -> list[list[str]]:
    seen = set()
    out = []
    for facet in facets:
        key = tuple(facet)
        if key not in seen:
            seen.add(key)
            out.append(facet)
    return out


def pmap(pred: PredictedQuery, gold: GoldQuery, l: int) -> float:
    """Mean over distinct predicted facets of their best gold AP.

    Repeating a facet verbatim scores it once, so padding the output with
    copies of its best list cannot lift the precision side.
    """
    if not pred.facets:
        return 0.0
    facets = _distinct(pred.facets)
    return sum(
        max(ap_at_l(bf, gm, l) for gm in gold.facets) for bf in facets
    ) / len(facets)


def hmean(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return 2.0 * a * b / (a + b)


def bmap(pred: PredictedQuery, gold: GoldQuery, l: int) -> float:
    return hmean(mmap(pred, gold, l), pmap(pred, gold, l))


def facet_count_distance(
    gold_counts: list[int], predicted_counts: list[int]
) -> tuple[float, float]:
    if len(gold_counts) != len(predicted_counts):
        raise ValueError("count lists must have equal length")
    diffs = [g - p for g, p in zip(gold_counts, predicted_counts)]
    l1 = float(sum(abs(d) for d in diffs))
    l2 = math.sqrt(sum(d * d for d in diffs))
    return l1, l2


def evaluate(
    golds: list[GoldQuery], preds: list[PredictedQuery], cutoffs: list[int]
) -> EvalReport:
    """Macro-average over queries; queries with no prediction score 0."""
    pred_by_id = {p.query_id: p for p in preds}
    per_query = []
    for gold in golds:
        pred = pred_by_id.get(gold.query_id, PredictedQuery(gold.query_id, []))
        mm = {l: mmap(pred, gold, l) for l in cutoffs}
        pm = {l: pmap(pred, gold, l) for l in cutoffs}
        bm = {l: hmean(mm[l], pm[l]) for l in cutoffs}
        per_query.append(
            QueryScores(
                query_id=gold.query_id,
                mmap=mm,
                pmap=pm,
                bmap=bm,
                gold_facets=len(gold.facets),
                predicted_facets=len(pred.facets),
            )
        )
    nq = len(per_query)
    if nq == 0:
        raise ValueError("no gold queries to evaluate")
    l1, l2 = facet_count_distance(
        [q.gold_facets for q in per_query],
        [q.predicted_facets for q in per_query],
    )
    return EvalReport(
        cutoffs=list(cutoffs),
        mmap={l: sum(q.mmap[l] for q in per_query) / nq for l in cutoffs},
        pmap={l: sum(q.pmap[l] for q in per_query) / nq for l in cutoffs},
        bmap={l: sum(q.bmap[l] for q in per_query) / nq for l in cutoffs},
        l1_distance=l1,
        l2_distance=l2,
        per_query=per_query,
    )


def _require(condition: bool, pointer: str, reason: str) -> None:
    if not condition:
        raise SchemaError(pointer, reason)


def load_gold(path) -> list[GoldQuery]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    _require(isinstance(data, list), "", "gold file must be a JSON list")
    golds = []
    for qi, item in enumerate(data):
        ptr = f"/{qi}"
        _require(isinstance(item, dict), ptr, "query must be an object")
        _require("query_id" in item, ptr, "missing query_id")
        facets = item.get("facets")
        _require(
            isinstance(facets, list) and facets, f"{ptr}/facets", "need >= 1 facet"
        )
        parsed = []
        for fi, facet in enumerate(facets):
            fptr = f"{ptr}/facets/{fi}"
            _require(isinstance(facet, list) and facet, fptr, "facet set is empty")
            parsed.append({normalize_entity(e) for e in facet})
        golds.append(
            GoldQuery(
                query_id=str(item["query_id"]),
                seeds=[normalize_entity(s) for s in item.get("seeds", [])],
                facets=parsed,
            )
        )
    return golds


def load_predictions(path) -> list[PredictedQuery]:
    """Prediction file: JSON list of {query_id, facets}.

    Each facet is either a ranked entity list or an expansion-output facet
    object with an "entities" list of [entity, weight] pairs.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    _require(isinstance(data, list), "", "prediction file must be a JSON list")
    preds = []
    for qi, item in enumerate(data):
        ptr = f"/{qi}"
        _require(isinstance(item, dict), ptr, "query must be an object")
        _require("query_id" in item, ptr, "missing query_id")
        facets = item.get("facets")
        _require(isinstance(facets, list), f"{ptr}/facets", "facets must be a list")
        parsed = []
        for fi, facet in enumerate(facets):
            fptr = f"{ptr}/facets/{fi}"
            if isinstance(facet, dict):
                facet = facet.get("entities")
                _require(
                    isinstance(facet, list), f"{fptr}/entities", "missing entities"
                )
                facet = [pair[0] for pair in facet]
            _require(isinstance(facet, list), fptr, "facet must be a list")
            ranked = [normalize_entity(e) for e in facet]
            _require(
                len(ranked) == len(set(ranked)), fptr, "ranked list has duplicates"
            )
            parsed.append(ranked)
        preds.append(PredictedQuery(query_id=str(item["query_id"]), facets=parsed))
    return preds
