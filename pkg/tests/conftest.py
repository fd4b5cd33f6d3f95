import pytest

from facetexpand.corpus import IndexConfig, build_index
from facetexpand.embeddings import load_embeddings

from synthdata import (
    ambiguous_company,
    mythology_space,
    two_facet_cities,
    write_embeddings,
)


class Planted:
    """A scenario materialized into an index plus an embedding table."""

    def __init__(self, scenario, tmp_path):
        self.scenario = scenario
        self.lines = scenario.corpus_lines()
        self.index = build_index(self.lines, IndexConfig())
        emb_path = tmp_path / "vectors.txt"
        write_embeddings(emb_path, scenario.word_vectors())
        self.embeddings_path = emb_path
        self.table = load_embeddings(emb_path)

    def write_corpus(self, path):
        path.write_text("\n".join(self.lines) + "\n", encoding="utf-8")
        return path


@pytest.fixture(scope="session")
def cities(tmp_path_factory):
    return Planted(two_facet_cities(), tmp_path_factory.mktemp("cities"))


@pytest.fixture(scope="session")
def company(tmp_path_factory):
    return Planted(ambiguous_company(), tmp_path_factory.mktemp("company"))


@pytest.fixture(scope="session")
def mythology(tmp_path_factory):
    return Planted(mythology_space(), tmp_path_factory.mktemp("mythology"))
