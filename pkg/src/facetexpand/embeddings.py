"""Pre-trained word-vector loading and skip-gram embedding composition."""
from __future__ import annotations

import gzip
import io
from dataclasses import dataclass

import numpy as np

from .corpus import SLOT, SkipGram
from .errors import DimensionError, FormatError


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]
    duplicate_count: int = 0

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.vectors

    def get(self, word: str):
        return self.vectors.get(word.lower())

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class SgEmbedding:
    """Mean of the in-vocabulary context-word vectors of one skip-gram."""

    vector: np.ndarray
    support: int


def _open_text(path):
    path = str(path)
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def load_embeddings(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Load whitespace-separated text vectors, optional "count dim" header.

    Duplicate words keep the first occurrence; the number of dropped
    duplicates is reported on the table.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    duplicates = 0
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if line_no == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header row
                except ValueError:
                    pass
            word, values = parts[0], parts[1:]
            if not values:
                raise FormatError(path, line_no, "row has no vector values")
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise FormatError(path, line_no, "non-numeric vector value") from None
            if not np.all(np.isfinite(vec)):
                raise FormatError(path, line_no, "NaN or Inf vector value")
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise FormatError(
                    path, line_no, f"row has {len(vec)} values, expected {dim}"
                )
            key = word.lower()
            if key in vectors:
                duplicates += 1
                continue
            vec.setflags(write=False)
            vectors[key] = vec
    if dim is None:
        raise FormatError(path, 0, "no vectors in file")
    if expected_dim is not None and dim != expected_dim:
        raise DimensionError(f"{path}: dimension {dim}, expected {expected_dim}")
    return EmbeddingTable(dim=dim, vectors=vectors, duplicate_count=duplicates)


def embed_skipgram(table: EmbeddingTable, sg: SkipGram) -> SgEmbedding | None:
    """Average the vectors of context words found in the table.

    The slot marker and out-of-vocabulary words contribute nothing; None
    when no context word is known.
    """
    found = []
    for tok in sg.left + sg.right:
        if tok == SLOT:
            continue
        vec = table.get(tok)
        if vec is not None:
            found.append((tok, vec))
    if not found:
        return None
    # summing in sorted-token order makes the mean bitwise permutation-invariant
    found.sort(key=lambda tv: tv[0])
    mean = np.mean([v for _, v in found], axis=0)
    mean.setflags(write=False)
    return SgEmbedding(vector=mean, support=len(found))
