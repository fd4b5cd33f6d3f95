import gzip

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facetexpand.corpus import SkipGram
from facetexpand.embeddings import embed_skipgram, load_embeddings
from facetexpand.errors import DimensionError, FormatError


def write(tmp_path, text, name="vec.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_basic(tmp_path):
    path = write(tmp_path, "cat 1.0 2.0\ndog 3.0 4.0\n")
    table = load_embeddings(path)
    assert table.dim == 2
    assert len(table) == 2
    assert np.array_equal(table.get("cat"), [1.0, 2.0])
    assert "Dog" in table  # case-insensitive lookup


def test_header_row_skipped(tmp_path):
    path = write(tmp_path, "2 3\ncat 1 2 3\ndog 4 5 6\n")
    table = load_embeddings(path)
    assert table.dim == 3 and len(table) == 2


def test_two_column_first_row_is_data_when_not_numeric(tmp_path):
    path = write(tmp_path, "cat 1.5\ndog 2.5\n")
    table = load_embeddings(path)
    assert table.dim == 1 and len(table) == 2


def test_duplicates_keep_first(tmp_path):
    path = write(tmp_path, "cat 1 2\nCAT 9 9\ndog 3 4\n")
    table = load_embeddings(path)
    assert table.duplicate_count == 1
    assert np.array_equal(table.get("cat"), [1.0, 2.0])


def test_format_errors_carry_line_numbers(tmp_path):
    with pytest.raises(FormatError, match=":2:"):
        load_embeddings(write(tmp_path, "cat 1 2\ndog x y\n"))
    with pytest.raises(FormatError, match=":3:"):
        load_embeddings(write(tmp_path, "cat 1 2\ndog 3 4\nfox 5\n"))
    with pytest.raises(FormatError):
        load_embeddings(write(tmp_path, "cat nan 2\n"))
    with pytest.raises(FormatError):
        load_embeddings(write(tmp_path, ""))


def test_expected_dim_enforced(tmp_path):
    path = write(tmp_path, "cat 1 2\n")
    with pytest.raises(DimensionError):
        load_embeddings(path, expected_dim=5)


def test_gzip_transparent(tmp_path):
    path = tmp_path / "vec.txt.gz"
    with gzip.open(path, "wt", encoding="utf-8") as fh:
        fh.write("cat 1 2\ndog 3 4\n")
    assert len(load_embeddings(path)) == 2


def test_embed_skipgram_mean_and_support(tmp_path):
    table = load_embeddings(write(tmp_path, "a 2 0\nb 0 4\n"))
    emb = embed_skipgram(table, SkipGram(left=("a",), right=("b",)))
    assert emb.support == 2
    assert np.array_equal(emb.vector, [1.0, 2.0])


def test_embed_skipgram_skips_oov_and_slot(tmp_path):
    table = load_embeddings(write(tmp_path, "a 2 0\n"))
    emb = embed_skipgram(table, SkipGram(left=("a", "zzz"), right=()))
    assert emb.support == 1
    assert np.array_equal(emb.vector, [2.0, 0.0])
    assert embed_skipgram(table, SkipGram(left=("zzz",), right=("qqq",))) is None


@settings(max_examples=30, deadline=None)
@given(st.permutations(["a", "b", "c", "d"]))
def test_embed_skipgram_order_invariant(tmp_path_factory, order):
    """The mean is bitwise identical however the context words are arranged."""
    tmp = tmp_path_factory.mktemp("emb")
    path = tmp / "v.txt"
    path.write_text(
        "a 0.1 0.7\nb 0.3 0.11\nc 0.77 0.2\nd 0.123 0.9\n", encoding="utf-8"
    )
    table = load_embeddings(path)
    base = embed_skipgram(table, SkipGram(left=("a", "b"), right=("c", "d")))
    mid = len(order) // 2
    other = embed_skipgram(
        table, SkipGram(left=tuple(order[:mid]), right=tuple(order[mid:]))
    )
    assert base.vector.tobytes() == other.vector.tobytes()
