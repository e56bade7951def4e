"""Instructional material ingestion: documents, chunking, topic extraction."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .errors import EmptyDocument, InvalidEncoding, NoTopicsFound, UnsupportedFormat

CHUNK_WINDOW = 1200

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_HEADING_RE = re.compile(r"^(#{1,2})(?!#)\s+(.+?)\s*$", re.MULTILINE)

# Small fixed stopword list used by the frequency fallback of extract_topics.
STOPWORDS = frozenset(
    """
    a about above after again all also am an and any are as at be because been
    before being below between both but by can did do does doing down during
    each few for from further had has have having he her here hers him his how
    i if in into is it its just me more most my no nor not now of off on once
    only or other our ours out over own same she so some such than that the
    their theirs them then there these they this those through to too under
    until up very was we were what when where which while who whom why will
    with you your yours
    """.split()
)


class DocumentFormat(Enum):
    PLAIN_TEXT = "plain_text"
    MARKDOWN = "markdown"


_EXTENSION_FORMATS = {
    ".txt": DocumentFormat.PLAIN_TEXT,
    ".md": DocumentFormat.MARKDOWN,
}


@dataclass(frozen=True)
class Document:
    """One ingested instructional document."""

    doc_id: str
    title: str
    format: DocumentFormat
    body: str
    ingested_at: datetime

    def __post_init__(self) -> None:
        if not self.body:
            raise EmptyDocument(f"document {self.doc_id!r} has an empty body")


@dataclass(frozen=True)
class Chunk:
    """A contiguous slice of a document body, at most CHUNK_WINDOW chars."""

    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class Topic:
    topic_id: str
    label: str
    source_doc_ids: tuple[str, ...] = field(default_factory=tuple)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run."""
    return _TOKEN_RE.findall(text.lower())


def slugify(label: str) -> str:
    """Reduce a display label to a lowercase hyphen-separated topic id."""
    return "-".join(tokenize(label))


def ingest_document(raw: bytes, filename: str, *, ingested_at: datetime | None = None) -> Document:
    """Decode raw file bytes into a Document.

    The format is inferred from the file extension and the doc id is a
    content hash, so re-ingesting identical bytes yields the same id.
    """
    dot = filename.rfind(".")
    extension = filename[dot:].lower() if dot >= 0 else ""
    fmt = _EXTENSION_FORMATS.get(extension)
    if fmt is None:
        raise UnsupportedFormat(f"unsupported file extension {extension!r} ({filename})")
    try:
        body = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{filename} is not valid UTF-8: {exc}") from exc
    if not body.strip():
        raise EmptyDocument(f"{filename} is empty or whitespace-only")
    doc_id = "doc-" + hashlib.sha256(raw).hexdigest()[:16]
    title = filename.rsplit("/", 1)[-1]
    if dot >= 0:
        title = title.rsplit(".", 1)[0]
    return Document(
        doc_id=doc_id,
        title=title,
        format=fmt,
        body=body,
        ingested_at=ingested_at or datetime.now(timezone.utc),
    )


def _sentence_spans(body: str) -> list[tuple[int, int]]:
    """Split into [start, end) spans ending after a terminator plus any
    following whitespace, so the spans partition the body exactly."""
    spans: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(body)
    while i < n:
        if body[i] in ".?!" and (i + 1 == n or body[i + 1].isspace()):
            end = i + 1
            while end < n and body[end].isspace():
                end += 1
            spans.append((start, end))
            start = end
            i = end
        else:
            i += 1
    if start < n:
        spans.append((start, n))
    return spans


def segment(doc: Document) -> list[Chunk]:
    """Split a document body into sentence-aligned chunks of at most
    CHUNK_WINDOW characters.

    Sentences are packed greedily; a single span longer than the window is
    hard-split at window boundaries. Chunk offsets index the original body
    and concatenating the chunk slices in ordinal order reconstructs it.
    """
    pieces: list[tuple[int, int]] = []
    for start, end in _sentence_spans(doc.body):
        while end - start > CHUNK_WINDOW:
            pieces.append((start, start + CHUNK_WINDOW))
            start += CHUNK_WINDOW
        pieces.append((start, end))

    packed: list[tuple[int, int]] = []
    cur_start, cur_end = pieces[0]
    for start, end in pieces[1:]:
        if end - cur_start <= CHUNK_WINDOW:
            cur_end = end
        else:
            packed.append((cur_start, cur_end))
            cur_start, cur_end = start, end
    packed.append((cur_start, cur_end))

    return [
        Chunk(
            chunk_id=f"{doc.doc_id}#{ordinal}",
            doc_id=doc.doc_id,
            ordinal=ordinal,
            text=doc.body[start:end],
            char_start=start,
            char_end=end,
        )
        for ordinal, (start, end) in enumerate(packed)
    ]


def extract_topics(doc: Document) -> list[Topic]:
    """Extract topic candidates from a document.

    Markdown level-1/level-2 headings become topics directly; otherwise the
    five highest-frequency non-stopword tokens do, with ties broken
    lexicographically. Output is sorted by topic id.
    """
    topics: dict[str, Topic] = {}
    if doc.format is DocumentFormat.MARKDOWN:
        for match in _HEADING_RE.finditer(doc.body):
            label = match.group(2).strip()
            topic_id = slugify(label)
            if topic_id and topic_id not in topics:
                topics[topic_id] = Topic(topic_id=topic_id, label=label, source_doc_ids=(doc.doc_id,))
    if not topics:
        counts: dict[str, int] = {}
        for token in tokenize(doc.body):
            if token not in STOPWORDS:
                counts[token] = counts.get(token, 0) + 1
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:5]
        for token, _ in ranked:
            topics[token] = Topic(topic_id=token, label=token, source_doc_ids=(doc.doc_id,))
    if not topics:
        raise NoTopicsFound(f"document {doc.doc_id!r} yields no headings and no non-stopword tokens")
    return sorted(topics.values(), key=lambda t: t.topic_id)
