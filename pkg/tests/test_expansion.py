import numpy as np
import pytest

from facetexpand.config import RunConfig
from facetexpand.corpus import IndexConfig, SkipGram, build_index
from facetexpand.embeddings import SgEmbedding
from facetexpand.errors import EmptyExpansionError, UnknownEntityError
from facetexpand.expansion import (
    CorpusScorer,
    ScoreMatrix,
    ScoreRequest,
    expand_facet,
    expand_query,
    expansions_to_json,
    score_corpus,
)
from facetexpand.fusion import CoherentFacet


def facet_of(canonicals, counts=None):
    counts = counts or [1] * len(canonicals)
    members = [
        (
            "seed",
            SkipGram.from_canonical(text),
            count,
            SgEmbedding(vector=np.zeros(2), support=1),
        )
        for text, count in zip(canonicals, counts)
    ]
    return CoherentFacet(members=members, seeds_covered={"seed"})


@pytest.fixture()
def small_index():
    lines = (
        ["fresh ripe apple pie now"] * 3
        + ["fresh ripe pear pie now"] * 2
        + ["fresh ripe mango pie now"] * 1
        + ["launch the rocket into orbit"] * 3
    )
    return build_index(lines, IndexConfig(window=2, min_count=1))


def test_score_request_validation():
    with pytest.raises(ValueError):
        ScoreRequest(skipgrams=())
    with pytest.raises(ValueError):
        ScoreRequest(skipgrams=("a __ b",), top_k=0)
    with pytest.raises(ValueError):
        ScoreRequest(skipgrams=("a __ b",), scope="galaxy")


def test_corpus_scorer_normalizes_columns(small_index):
    matrix = score_corpus(
        small_index, ScoreRequest(skipgrams=("fresh ripe __ pie now",))
    )
    col = matrix.columns["fresh ripe __ pie now"]
    assert sum(col.values()) == pytest.approx(1.0)
    assert col["apple"] == pytest.approx(3 / 6)
    assert col["pear"] == pytest.approx(2 / 6)
    assert col["mango"] == pytest.approx(1 / 6)


def test_corpus_scorer_skips_unknown_skipgram(small_index):
    matrix = score_corpus(
        small_index, ScoreRequest(skipgrams=("never seen __ before",))
    )
    assert matrix.columns == {}


def test_score_matrix_weights_sum_over_columns():
    matrix = ScoreMatrix(
        columns={
            "a __": {"x": 0.5, "y": 0.2},
            "b __": {"x": 0.1, "z": 0.4},
        }
    )
    assert matrix.weights() == {"x": 0.6, "y": 0.2, "z": 0.4}


def test_expand_facet_ranks_by_summed_scores(small_index):
    facet = facet_of(["fresh ripe __ pie now"])
    result = expand_facet(
        facet, CorpusScorer(small_index), seeds=set(), index=small_index
    )
    assert [e for e, _ in result.entities[:3]] == ["apple", "pear", "mango"]
    weights = [w for _, w in result.entities]
    assert weights == sorted(weights, reverse=True)
    assert result.skipgram_count == 1
    assert result.scorer == "corpus"


def test_expand_facet_excludes_seeds(small_index):
    facet = facet_of(["fresh ripe __ pie now"])
    result = expand_facet(
        facet, CorpusScorer(small_index), seeds={"apple"}, index=small_index
    )
    assert "apple" not in [e for e, _ in result.entities]


def test_expand_facet_distinct_skipgrams_count_once(small_index):
    # the same canonical context listed twice must not double its votes
    once = facet_of(["fresh ripe __ pie now"])
    twice = facet_of(["fresh ripe __ pie now", "fresh ripe __ pie now"])
    scorer = CorpusScorer(small_index)
    a = expand_facet(once, scorer, seeds=set(), index=small_index)
    b = expand_facet(twice, scorer, seeds=set(), index=small_index)
    assert a.entities == b.entities


def test_expand_facet_frequency_weighting(small_index):
    facet = facet_of(
        ["fresh ripe __ pie now", "launch the __ into orbit"], counts=[1, 5]
    )
    scorer = CorpusScorer(small_index)
    plain = expand_facet(facet, scorer, seeds=set(), index=small_index)
    weighted = expand_facet(
        facet, scorer, seeds=set(), index=small_index, frequency_weighted=True
    )
    top_plain = dict(plain.entities)
    top_weighted = dict(weighted.entities)
    assert top_weighted["rocket"] == pytest.approx(5 * top_plain["rocket"])


def test_expand_facet_empty_raises(small_index):
    facet = facet_of(["never seen __ before"])
    with pytest.raises(EmptyExpansionError):
        expand_facet(facet, CorpusScorer(small_index), seeds=set())


def test_expand_facet_truncates(small_index):
    facet = facet_of(["fresh ripe __ pie now"])
    result = expand_facet(
        facet, CorpusScorer(small_index), seeds=set(), n=2, index=small_index
    )
    assert len(result.entities) == 2


def test_expand_query_planted_cities(cities):
    expansions = expand_query(
        ["beijing", "london"], cities.index, cities.table, RunConfig()
    )
    assert len(expansions) == 2
    plants = [
        set(cities.scenario.entities["olympics"]),
        set(cities.scenario.entities["capital"]),
    ]
    for expansion in expansions:
        top5 = {e for e, _ in expansion.entities[:5]}
        assert any(top5 <= plant for plant in plants)


def test_expand_query_unknown_seed(cities):
    with pytest.raises(UnknownEntityError):
        expand_query(["beijing", "narnia"], cities.index, cities.table)


def test_expand_query_empty():
    with pytest.raises(ValueError):
        expand_query([], None, None)


def test_expand_query_thread_count_irrelevant(cities):
    import dataclasses

    runs = [
        expand_query(
            ["beijing", "london"],
            cities.index,
            cities.table,
            dataclasses.replace(RunConfig(), threads=t),
        )
        for t in (1, 2, 4)
    ]
    payloads = [expansions_to_json(["beijing", "london"], r) for r in runs]
    assert payloads[0] == payloads[1] == payloads[2]


def test_expansions_to_json_shape(cities):
    expansions = expand_query(
        ["beijing", "london"], cities.index, cities.table, RunConfig()
    )
    payload = expansions_to_json(["beijing", "london"], expansions)
    assert payload["query"] == ["beijing", "london"]
    for facet in payload["facets"]:
        assert set(facet) == {"id", "skipgram_count", "scorer", "entities"}
        for entity, weight in facet["entities"]:
            assert isinstance(entity, str) and weight > 0
