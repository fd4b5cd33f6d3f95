"""Corpus ingestion: vocabulary, skip-gram context extraction, inverted index.

The index is canonical: entity and skip-gram ids are assigned in sorted
order, so a sharded build merged from partial scans is identical to the
sequential build.
"""
from __future__ import annotations

import gzip
import hashlib
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import (
    CorpusReadError,
    EmptyCorpusError,
    IncompatibleIndexError,
    IndexChecksumError,
    UnknownEntityError,
)

SLOT = "__"

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)

_MAGIC = b"FSGX"
_FORMAT_VERSION = 1


def tokenize(line: str) -> list[str]:
    """Lowercase and split on non-word boundaries, keeping underscores."""
    return _TOKEN_RE.findall(line.lower())


@dataclass(frozen=True)
class Document:
    id: int
    tokens: tuple[str, ...]


@dataclass(frozen=True, order=True)
class SkipGram:
    """A context window around one entity slot.

    `left`/`right` hold up to `window` tokens on each side; at least one
    side is non-empty. Contexts at document boundaries stay asymmetric.
    """

    left: tuple[str, ...]
    right: tuple[str, ...]

    def canonical(self) -> str:
        return " ".join(self.left + (SLOT,) + self.right)

    @classmethod
    def from_canonical(cls, text: str) -> "SkipGram":
        parts = text.split(" ")
        slot = parts.index(SLOT)
        return cls(left=tuple(parts[:slot]), right=tuple(parts[slot + 1 :]))


@dataclass(frozen=True)
class IndexConfig:
    window: int = 2
    min_count: int = 3
    stopwords: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")


@dataclass
class CorpusIndex:
    """Immutable inverted maps between entities and skip-gram contexts."""

    window: int
    min_count: int
    entities: list[str]
    entity_freq: list[int]
    skipgrams: list[SkipGram]
    stopword_only: list[bool]
    entity_to_sg: list[dict[int, int]]
    sg_to_entity: list[dict[int, int]]
    _entity_ids: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._entity_ids:
            self._entity_ids = {e: i for i, e in enumerate(self.entities)}

    def __eq__(self, other):
        if not isinstance(other, CorpusIndex):
            return NotImplemented
        return (
            self.window == other.window
            and self.min_count == other.min_count
            and self.entities == other.entities
            and self.entity_freq == other.entity_freq
            and self.skipgrams == other.skipgrams
            and self.stopword_only == other.stopword_only
            and self.entity_to_sg == other.entity_to_sg
            and self.sg_to_entity == other.sg_to_entity
        )

    def entity_id(self, entity: str) -> int:
        try:
            return self._entity_ids[entity]
        except KeyError:
            raise UnknownEntityError(entity) from None

    def __contains__(self, entity: str) -> bool:
        return entity in self._entity_ids

    def frequency(self, entity: str) -> int:
        return self.entity_freq[self.entity_id(entity)]

    @property
    def vocab_size(self) -> int:
        return len(self.entities)

    @property
    def skipgram_count(self) -> int:
        return len(self.skipgrams)


def read_documents(lines: Iterable[str], path: str = "<stream>") -> Iterator[Document]:
    doc_id = 0
    for line_no, line in enumerate(lines, start=1):
        try:
            tokens = tokenize(line)
        except Exception as exc:  # pragma: no cover - tokenizer is total
            raise CorpusReadError(path, line_no, str(exc)) from exc
        if not tokens:
            continue
        yield Document(id=doc_id, tokens=tuple(tokens))
        doc_id += 1


def _scan(documents: Iterable[Document], window: int):
    """One pass: token frequencies plus per-occurrence context counts.

    Contexts are recorded for every token; the min-count filter is applied
    at finalize time because frequencies are only known globally.
    """
    token_freq: Counter[str] = Counter()
    pair_counts: Counter[tuple[str, SkipGram]] = Counter()
    for doc in documents:
        tokens = doc.tokens
        token_freq.update(tokens)
        n = len(tokens)
        for i, tok in enumerate(tokens):
            left = tuple(tokens[max(0, i - window) : i])
            right = tuple(tokens[i + 1 : i + 1 + window])
            if not left and not right:
                continue
            pair_counts[(tok, SkipGram(left, right))] += 1
    return token_freq, pair_counts


def _merge_scans(scans):
    token_freq: Counter[str] = Counter()
    pair_counts: Counter[tuple[str, SkipGram]] = Counter()
    for tf, pc in scans:
        token_freq.update(tf)
        pair_counts.update(pc)
    return token_freq, pair_counts


def _finalize(token_freq, pair_counts, config: IndexConfig) -> CorpusIndex:
    if not token_freq:
        raise EmptyCorpusError("corpus contains no non-empty documents")
    entities = sorted(t for t, f in token_freq.items() if f >= config.min_count)
    entity_ids = {e: i for i, e in enumerate(entities)}
    sg_set = {sg for (tok, sg) in pair_counts if tok in entity_ids}
    skipgrams = sorted(sg_set, key=lambda s: s.canonical())
    sg_ids = {sg: i for i, sg in enumerate(skipgrams)}

    entity_to_sg: list[dict[int, int]] = [dict() for _ in entities]
    sg_to_entity: list[dict[int, int]] = [dict() for _ in skipgrams]
    for (tok, sg), count in sorted(
        pair_counts.items(), key=lambda kv: (kv[0][0], kv[0][1].canonical())
    ):
        eid = entity_ids.get(tok)
        if eid is None:
            continue
        sid = sg_ids[sg]
        entity_to_sg[eid][sid] = entity_to_sg[eid].get(sid, 0) + count
        sg_to_entity[sid][eid] = sg_to_entity[sid].get(eid, 0) + count

    stop = config.stopwords
    stopword_only = [
        all(t in stop for t in sg.left + sg.right) if stop else False
        for sg in skipgrams
    ]
    return CorpusIndex(
        window=config.window,
        min_count=config.min_count,
        entities=entities,
        entity_freq=[token_freq[e] for e in entities],
        skipgrams=skipgrams,
        stopword_only=stopword_only,
        entity_to_sg=entity_to_sg,
        sg_to_entity=sg_to_entity,
    )


def build_index(
    lines: Iterable[str], config: IndexConfig = IndexConfig(), path: str = "<stream>"
) -> CorpusIndex:
    docs = list(read_documents(lines, path=path))
    if not docs:
        raise EmptyCorpusError("corpus contains no non-empty documents")
    return _finalize(*_scan(docs, config.window), config)


def build_index_sharded(
    lines: Iterable[str],
    config: IndexConfig = IndexConfig(),
    shards: int = 4,
    path: str = "<stream>",
) -> CorpusIndex:
    """Shard documents round-robin, scan each shard, merge. Equals build_index."""
    docs = list(read_documents(lines, path=path))
    if not docs:
        raise EmptyCorpusError("corpus contains no non-empty documents")
    buckets = [docs[i::shards] for i in range(shards)]
    scans = [_scan(bucket, config.window) for bucket in buckets if bucket]
    return _finalize(*_merge_scans(scans), config)


def get_skipgrams(index: CorpusIndex, entity: str) -> list[tuple[SkipGram, int]]:
    """All contexts of an entity, by descending count then canonical form."""
    eid = index.entity_id(entity)
    pairs = [
        (index.skipgrams[sid], count) for sid, count in index.entity_to_sg[eid].items()
    ]
    pairs.sort(key=lambda p: (-p[1], p[0].canonical()))
    return pairs


def _payload(index: CorpusIndex) -> bytes:
    doc = {
        "window": index.window,
        "min_count": index.min_count,
        "entities": [[e, f] for e, f in zip(index.entities, index.entity_freq)],
        "skipgrams": [sg.canonical() for sg in index.skipgrams],
        "stopword_only": [int(b) for b in index.stopword_only],
        "postings": [
            [eid, sid, count]
            for eid, row in enumerate(index.entity_to_sg)
            for sid, count in sorted(row.items())
        ],
    }
    raw = json.dumps(doc, separators=(",", ":"), sort_keys=True).encode("utf-8")
    return gzip.compress(raw, mtime=0)


def serialize_index(index: CorpusIndex) -> bytes:
    payload = _payload(index)
    digest = hashlib.sha256(payload).digest()
    return _MAGIC + _FORMAT_VERSION.to_bytes(2, "big") + digest + payload


def save_index(index: CorpusIndex, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_index(index))


def load_index(path) -> CorpusIndex:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(_MAGIC) + 2 + 32 or blob[: len(_MAGIC)] != _MAGIC:
        raise IncompatibleIndexError(f"{path}: not an index file (bad magic bytes)")
    version = int.from_bytes(blob[4:6], "big")
    if version != _FORMAT_VERSION:
        raise IncompatibleIndexError(
            f"{path}: format version {version}, expected {_FORMAT_VERSION}"
        )
    digest, payload = blob[6:38], blob[38:]
    if hashlib.sha256(payload).digest() != digest:
        raise IndexChecksumError(f"{path}: checksum mismatch (truncated or corrupt)")
    doc = json.loads(gzip.decompress(payload).decode("utf-8"))
    entities = [e for e, _ in doc["entities"]]
    skipgrams = [SkipGram.from_canonical(s) for s in doc["skipgrams"]]
    entity_to_sg: list[dict[int, int]] = [dict() for _ in entities]
    sg_to_entity: list[dict[int, int]] = [dict() for _ in skipgrams]
    for eid, sid, count in doc["postings"]:
        entity_to_sg[eid][sid] = count
        sg_to_entity[sid][eid] = count
    return CorpusIndex(
        window=doc["window"],
        min_count=doc["min_count"],
        entities=entities,
        entity_freq=[f for _, f in doc["entities"]],
        skipgrams=skipgrams,
        stopword_only=[bool(b) for b in doc["stopword_only"]],
        entity_to_sg=entity_to_sg,
        sg_to_entity=sg_to_entity,
    )


def load_stopwords(path) -> frozenset[str]:
    with io.open(path, "r", encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())
