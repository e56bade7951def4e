"""Grounded lesson and chat generation behind a pluggable completion client.

Generation follows a plain-text section protocol so the output is
checkable: the model is told to reason step by step but to deliver its
payload under fixed headers, ending with a SOURCES: line that may cite
only the snippet ids supplied in the prompt. Cited ids that were never
supplied are dropped and counted, never passed through.
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Protocol

import httpx

from .corpus import Topic
from .errors import ClientFailure, EmptyQuestion, MissingSection, UnparseableResponse
from .retrieval import RetrievedSnippet

DEFAULT_MAX_OUTPUT_CHARS = 4000
MAX_HISTORY_TURNS = 10
REMOTE_MAX_ATTEMPTS = 3
REMOTE_BACKOFF_START = 0.5
NO_CONTEXT_MARKER = "NO CONTEXT AVAILABLE"

SUMMARY_HEADER = "SUMMARY:"
DETAIL_HEADERS = ("DEFINITIONS:", "FEATURES:", "IMPORTANCE:", "CONNECTIONS:", "EXAMPLES:")
SOURCES_HEADER = "SOURCES:"
ALL_HEADERS = (SUMMARY_HEADER, *DETAIL_HEADERS, SOURCES_HEADER)


class ContentType(Enum):
    BRIEF_SUMMARY = "brief_summary"
    KNOWLEDGE_DETAILS = "knowledge_details"


class ChatRole(Enum):
    STUDENT = "student"
    AGENT = "agent"


class LlmMode(Enum):
    STUB = "stub"
    REMOTE = "remote"


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    snippet_block: tuple[tuple[str, str], ...]

    @property
    def text(self) -> str:
        return f"{self.system_text}\n\n{self.user_text}"

    @property
    def snippet_ids(self) -> tuple[str, ...]:
        return tuple(chunk_id for chunk_id, _ in self.snippet_block)


@dataclass(frozen=True)
class LessonContent:
    topic_id: str
    content_type: ContentType
    brief_summary: str = ""
    definitions: str = ""
    features: str = ""
    importance: str = ""
    connections: str = ""
    examples: str = ""
    sources: tuple[str, ...] = ()
    ungrounded: bool = False
    dropped_sources: int = 0

    def __post_init__(self) -> None:
        if not self.sources and not self.ungrounded:
            raise ValueError("lesson without sources must be flagged ungrounded")


@dataclass(frozen=True)
class ChatTurn:
    role: ChatRole
    text: str
    sources: tuple[str, ...] = ()
    at: datetime | None = None


class LlmClient(Protocol):
    mode: LlmMode

    def complete(self, prompt: str, max_output_chars: int = DEFAULT_MAX_OUTPUT_CHARS) -> str:
        ...


def _snippet_lines(snippets: list[RetrievedSnippet]) -> str:
    if not snippets:
        return NO_CONTEXT_MARKER
    return "\n".join(f"[{s.chunk_id}] {s.text}" for s in snippets)


def _layout_for(content_type: ContentType) -> tuple[str, ...]:
    if content_type is ContentType.KNOWLEDGE_DETAILS:
        return ALL_HEADERS
    return (SUMMARY_HEADER, SOURCES_HEADER)


def build_lesson_prompt(
    topic: Topic,
    content_type: ContentType,
    snippets: list[RetrievedSnippet],
) -> PromptBundle:
    """Compose the teaching prompt for one topic.

    The user text embeds the topic label and every snippet as
    "[chunk_id] text"; when no snippets are available the prompt carries
    the NO CONTEXT AVAILABLE marker instead and the lesson is ungrounded.
    """
    layout = "\n".join(_layout_for(content_type))
    system_text = (
        "You are a tutoring agent. Reason step by step about the context "
        "before you write, then deliver the lesson using exactly these "
        "section headers, each on its own line, in this order:\n"
        f"{layout}\n"
        "Cite only the snippet ids supplied below. End with the "
        f"{SOURCES_HEADER} line listing the cited ids, comma-separated."
    )
    user_text = (
        f"Topic: {topic.label}\n"
        f"Content type: {content_type.value}\n\n"
        "Context snippets:\n"
        f"{_snippet_lines(snippets)}\n\n"
        "Write the lesson now."
    )
    return PromptBundle(
        system_text=system_text,
        user_text=user_text,
        snippet_block=tuple((s.chunk_id, s.text) for s in snippets),
    )


def build_chat_prompt(
    question: str,
    snippets: list[RetrievedSnippet],
    history: list[ChatTurn],
) -> PromptBundle:
    """Compose the chat prompt: recent history, snippet block, question."""
    if not question.strip():
        raise EmptyQuestion("chat question must be non-empty")
    system_text = (
        "You are a tutoring agent. Think step by step, answer the student's "
        "question from the supplied context, and explain why the answer "
        "applies. End your reply with a single "
        f"{SOURCES_HEADER} line listing the cited snippet ids, comma-separated. "
        "Cite only ids supplied below."
    )
    parts: list[str] = []
    recent = history[-MAX_HISTORY_TURNS:]
    if recent:
        lines = "\n".join(f"{turn.role.value.capitalize()}: {turn.text}" for turn in recent)
        parts.append(f"Conversation so far:\n{lines}")
    parts.append(f"Context snippets:\n{_snippet_lines(snippets)}")
    parts.append(f"Question: {question}")
    return PromptBundle(
        system_text=system_text,
        user_text="\n\n".join(parts),
        snippet_block=tuple((s.chunk_id, s.text) for s in snippets),
    )


def _split_sections(raw: str) -> dict[str, str]:
    sections: dict[str, list[str]] = {}
    current: str | None = None
    found_any = False
    for line in raw.splitlines():
        stripped = line.strip()
        header = next((h for h in ALL_HEADERS if stripped.startswith(h)), None)
        if header is not None:
            found_any = True
            current = header
            remainder = stripped[len(header):].strip()
            sections.setdefault(header, [])
            if remainder:
                sections[header].append(remainder)
        elif current is not None:
            sections[current].append(line)
    if not found_any:
        raise UnparseableResponse("no section headers found in model output")
    return {header: "\n".join(lines).strip() for header, lines in sections.items()}


def _filter_sources(cited: Iterable[str], allowed: Iterable[str]) -> tuple[tuple[str, ...], int]:
    allowed_set = set(allowed)
    kept: list[str] = []
    dropped = 0
    for chunk_id in cited:
        if chunk_id in allowed_set:
            if chunk_id not in kept:
                kept.append(chunk_id)
        else:
            dropped += 1
    return tuple(kept), dropped


def _parse_cited(sources_text: str) -> list[str]:
    return [token.strip() for token in sources_text.split(",") if token.strip()]


def parse_lesson(
    raw: str,
    content_type: ContentType,
    *,
    topic_id: str = "",
    allowed_sources: Iterable[str] = (),
) -> LessonContent:
    """Parse a sectioned lesson response and filter its citations.

    Sections required by the content type must be present and non-empty;
    cited ids that were not supplied in the prompt are dropped and counted.
    """
    sections = _split_sections(raw)
    required = [SUMMARY_HEADER] if content_type is ContentType.BRIEF_SUMMARY else list(DETAIL_HEADERS)
    required.append(SOURCES_HEADER)
    for header in required:
        if header not in sections:
            raise MissingSection(header.rstrip(":"))
        if header is not SOURCES_HEADER and not sections[header]:
            raise MissingSection(header.rstrip(":"))
    sources, dropped = _filter_sources(_parse_cited(sections.get(SOURCES_HEADER, "")), allowed_sources)
    return LessonContent(
        topic_id=topic_id,
        content_type=content_type,
        brief_summary=sections.get(SUMMARY_HEADER, ""),
        definitions=sections.get("DEFINITIONS:", ""),
        features=sections.get("FEATURES:", ""),
        importance=sections.get("IMPORTANCE:", ""),
        connections=sections.get("CONNECTIONS:", ""),
        examples=sections.get("EXAMPLES:", ""),
        sources=sources,
        ungrounded=not sources,
        dropped_sources=dropped,
    )


def answer_chat(
    question: str,
    snippets: list[RetrievedSnippet],
    history: list[ChatTurn],
    client: LlmClient,
    *,
    max_output_chars: int = DEFAULT_MAX_OUTPUT_CHARS,
    at: datetime | None = None,
) -> ChatTurn:
    """Run one grounded chat exchange and return the agent's turn."""
    bundle = build_chat_prompt(question, snippets, history)
    raw = client.complete(bundle.text, max_output_chars)
    if not raw.strip():
        raise UnparseableResponse("model returned an empty response")
    answer_text = raw
    cited: list[str] = []
    match = re.search(rf"^\s*{SOURCES_HEADER}(.*)$", raw, re.MULTILINE)
    if match is not None:
        answer_text = raw[: match.start()]
        cited = _parse_cited(match.group(1))
    sources, _ = _filter_sources(cited, bundle.snippet_ids)
    return ChatTurn(
        role=ChatRole.AGENT,
        text=answer_text.strip(),
        sources=sources,
        at=at or datetime.now(timezone.utc),
    )


_STUB_SECTION_TEXT = {
    SUMMARY_HEADER: "{label} in brief: the retrieved material covers the essentials.",
    "DEFINITIONS:": "{label} is defined by the key terms found in the cited snippets.",
    "FEATURES:": "Key features of {label} follow from the retrieved context.",
    "IMPORTANCE:": "{label} matters for the surrounding course topics.",
    "CONNECTIONS:": "{label} connects to its prerequisite and dependent topics.",
    "EXAMPLES:": "A short worked example of {label} based on the cited snippets.",
}


class StubLlmClient:
    """Deterministic stand-in for a language model.

    Echoes the section layout demanded by the prompt and cites the first
    two snippet ids it finds, so the grounding invariants are exercisable
    entirely offline.
    """

    mode = LlmMode.STUB

    def complete(self, prompt: str, max_output_chars: int = DEFAULT_MAX_OUTPUT_CHARS) -> str:
        snippet_ids = list(dict.fromkeys(re.findall(r"^\[([^\]]+)\]", prompt, re.MULTILINE)))
        cited = ", ".join(snippet_ids[:2])
        label_match = re.search(r"^Topic: (.+)$", prompt, re.MULTILINE)
        label = label_match.group(1).strip() if label_match else "the topic"

        lesson_headers = [h for h in (SUMMARY_HEADER, *DETAIL_HEADERS) if h in prompt]
        if lesson_headers:
            lines = []
            for header in lesson_headers:
                lines.append(header)
                lines.append(_STUB_SECTION_TEXT[header].format(label=label))
            lines.append(f"{SOURCES_HEADER} {cited}".rstrip())
            return "\n".join(lines)[:max_output_chars]

        question_match = re.search(r"^Question: (.+)$", prompt, re.MULTILINE)
        question = question_match.group(1).strip() if question_match else "your question"
        answer = (
            f"Here is a grounded answer to: {question} "
            "The cited snippets support this explanation step by step."
        )
        return f"{answer}\n{SOURCES_HEADER} {cited}".rstrip()[:max_output_chars]


class RemoteLlmClient:
    """Completion client for a remote text-completion endpoint.

    Sends one JSON request per completion and retries transient failures
    with exponential backoff before surfacing ClientFailure.
    """

    mode = LlmMode.REMOTE

    def __init__(
        self,
        url: str,
        api_key: str = "",
        *,
        timeout: float = 30.0,
        max_attempts: int = REMOTE_MAX_ATTEMPTS,
        backoff_start: float = REMOTE_BACKOFF_START,
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ) -> None:
        self.url = url
        self.api_key = api_key
        self.max_attempts = max_attempts
        self.backoff_start = backoff_start
        self._sleep = sleep
        self._client = httpx.Client(transport=transport, timeout=timeout)

    def complete(self, prompt: str, max_output_chars: int = DEFAULT_MAX_OUTPUT_CHARS) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                response = self._client.post(
                    self.url,
                    json={"prompt": prompt, "max_output_chars": max_output_chars},
                    headers=headers,
                )
                response.raise_for_status()
                return str(response.json()["text"])[:max_output_chars]
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < self.max_attempts:
                    self._sleep(self.backoff_start * (2 ** (attempt - 1)))
        raise ClientFailure(f"remote completion failed: {last_error}", attempts=self.max_attempts)


def client_from_env(environ=os.environ) -> LlmClient:
    """Build the completion client from EXPERTAGENT_LLM_* variables."""
    mode = environ.get("EXPERTAGENT_LLM_MODE", "stub").lower()
    if mode == LlmMode.STUB.value:
        return StubLlmClient()
    if mode == LlmMode.REMOTE.value:
        url = environ.get("EXPERTAGENT_LLM_URL", "")
        if not url:
            raise ValueError("EXPERTAGENT_LLM_URL is required in remote mode")
        return RemoteLlmClient(url, environ.get("EXPERTAGENT_LLM_KEY", ""))
    raise ValueError(f"unknown EXPERTAGENT_LLM_MODE {mode!r}")
