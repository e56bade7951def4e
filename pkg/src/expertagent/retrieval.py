"""Embedding, indexing, and top-k snippet retrieval over corpus chunks.

The default embedder is a deterministic hash-bucket model: tokens are
hashed with FNV-1a (64-bit) into 256 buckets and the bucket counts are
L2-normalized. It needs no network and is stable across runs, which keeps
retrieval reproducible in tests; a remote embedding provider can be
plugged in behind the same contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

from .corpus import Chunk, tokenize
from .errors import DimensionMismatch, EmptyIndex, EmptyIndexQueried, EmptyText

EMBEDDING_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; fixed constants, stable across processes."""
    value = _FNV_OFFSET
    for byte in data:
        value = ((value ^ byte) * _FNV_PRIME) & _MASK64
    return value


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        norm_sq = 0.0
        for v in self.values:
            norm_sq += v * v
        if abs(norm_sq - 1.0) > 2e-9:
            raise ValueError(f"embedding vector is not unit-norm (|v|^2={norm_sq!r})")


@dataclass(frozen=True)
class IndexEntry:
    chunk_id: str
    vector: EmbeddingVector
    text: str
    doc_id: str


@dataclass(frozen=True)
class RetrievalIndex:
    """Immutable snapshot of embedded chunks; rebuilds replace it wholesale."""

    entries: tuple[IndexEntry, ...]
    built_at: datetime
    skipped_count: int = 0


@dataclass(frozen=True)
class RetrievedSnippet:
    chunk_id: str
    doc_id: str
    text: str
    score: float
    rank: int


def embed_text(text: str) -> EmbeddingVector:
    """Embed text with the deterministic hash-bucket embedder."""
    tokens = tokenize(text)
    if not tokens:
        raise EmptyText("text has no alphanumeric tokens")
    counts = [0] * EMBEDDING_DIM
    for token in tokens:
        counts[fnv1a64(token.encode("utf-8")) % EMBEDDING_DIM] += 1
    norm = sum(c * c for c in counts) ** 0.5
    return EmbeddingVector(values=tuple(c / norm for c in counts))


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Dot product of two unit-norm vectors; result lies in [-1, 1]."""
    if len(a.values) != len(b.values):
        raise DimensionMismatch(f"dim {len(a.values)} vs {len(b.values)}")
    total = 0.0
    for x, y in zip(a.values, b.values):
        total += x * y
    return total


def build_index(chunks: list[Chunk], *, built_at: datetime | None = None) -> RetrievalIndex:
    """Embed chunks into a fresh index; token-free chunks are skipped and
    counted rather than failing the build."""
    entries: list[IndexEntry] = []
    skipped = 0
    seen: set[str] = set()
    for chunk in chunks:
        if chunk.chunk_id in seen:
            raise ValueError(f"duplicate chunk id {chunk.chunk_id!r}")
        seen.add(chunk.chunk_id)
        try:
            vector = embed_text(chunk.text)
        except EmptyText:
            skipped += 1
            continue
        entries.append(IndexEntry(chunk_id=chunk.chunk_id, vector=vector, text=chunk.text, doc_id=chunk.doc_id))
    if not entries:
        raise EmptyIndex(f"no embeddable chunks ({skipped} skipped)")
    return RetrievalIndex(
        entries=tuple(entries),
        built_at=built_at or datetime.now(timezone.utc),
        skipped_count=skipped,
    )


def retrieve(index: RetrievalIndex, query: str, k: int) -> list[RetrievedSnippet]:
    """Return the k entries most similar to the query.

    Ordering is score descending with ties broken by chunk id ascending;
    an index smaller than k returns everything, still ranked.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not index.entries:
        raise EmptyIndexQueried("retrieval index has no entries")
    query_vector = embed_text(query)
    scored = [
        (cosine_similarity(query_vector, entry.vector), entry)
        for entry in index.entries
    ]
    scored.sort(key=lambda item: (-item[0], item[1].chunk_id))
    return [
        RetrievedSnippet(
            chunk_id=entry.chunk_id,
            doc_id=entry.doc_id,
            text=entry.text,
            score=score,
            rank=rank,
        )
        for rank, (score, entry) in enumerate(scored[:k], start=1)
    ]
