"""Exception taxonomy shared across the engine.

Every failure the engine reports deliberately is an ExpertAgentError
subclass; anything else escaping a public function is a bug.
"""

from __future__ import annotations


class ExpertAgentError(Exception):
    """Base class for all engine errors."""


# --- corpus ---------------------------------------------------------------

class UnsupportedFormat(ExpertAgentError):
    """File extension is not one of the supported document formats."""


class EmptyDocument(ExpertAgentError):
    """Document body is empty or whitespace-only."""


class InvalidEncoding(ExpertAgentError):
    """Raw bytes do not decode as UTF-8."""


class NoTopicsFound(ExpertAgentError):
    """Neither headings nor non-stopword tokens yielded a topic."""


# --- retrieval ------------------------------------------------------------

class EmptyText(ExpertAgentError):
    """Text has no alphanumeric tokens and cannot be embedded."""


class DimensionMismatch(ExpertAgentError):
    """Vectors of different dimensionality were combined."""


class EmptyIndex(ExpertAgentError):
    """Every chunk was skipped; there is nothing to index."""


class EmptyIndexQueried(ExpertAgentError):
    """A retrieval was attempted against an index with no entries."""


# --- student model --------------------------------------------------------

class NoTopics(ExpertAgentError):
    """A student model cannot be initialized without topics."""


class DuplicateStudent(ExpertAgentError):
    """A student with this id already exists."""


class DegenerateDenominator(ExpertAgentError):
    """The Bayes update denominator is zero at these parameters."""


class UnknownTopic(ExpertAgentError):
    """The topic id is not known to the model, graph, or course."""


class MissingTopicState(ExpertAgentError):
    """A graph node has no corresponding topic state in the model."""


class UnknownStudent(ExpertAgentError):
    """The student id is not known to the service."""


# --- quiz -----------------------------------------------------------------

class NoQuestionsForTopic(ExpertAgentError):
    """The question bank holds no questions for the requested topic."""


class InvalidOption(ExpertAgentError):
    """A multiple-choice answer is not a valid option index."""


class NoAnswers(ExpertAgentError):
    """A review was requested for a session with no recorded answers."""


class UnknownSession(ExpertAgentError):
    """The quiz session id does not match the student's active session."""


class AlreadyAnswered(ExpertAgentError):
    """The question was already answered in this session."""


# --- tutor ----------------------------------------------------------------

class EmptyQuestion(ExpertAgentError):
    """A chat question must be non-empty."""


class MissingSection(ExpertAgentError):
    """A required section header is absent from the model response."""

    def __init__(self, section: str) -> None:
        super().__init__(f"missing section: {section}")
        self.section = section


class UnparseableResponse(ExpertAgentError):
    """The model response contains none of the expected section headers."""


class ClientFailure(ExpertAgentError):
    """The remote completion client failed after all retry attempts."""

    def __init__(self, message: str, attempts: int) -> None:
        super().__init__(f"{message} (attempts={attempts})")
        self.attempts = attempts


# --- feedback -------------------------------------------------------------

class InvalidRating(ExpertAgentError):
    """Rating must be an integer in [1, 5]."""


# --- persistence ----------------------------------------------------------

class IoFailure(ExpertAgentError):
    """An underlying filesystem operation failed."""


class NotFound(ExpertAgentError):
    """The requested record does not exist on disk."""


class CorruptRecord(ExpertAgentError):
    """A persisted record violates an invariant."""

    def __init__(self, field: str, detail: str = "") -> None:
        message = f"corrupt record: {field}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
        self.field = field


class CyclicPrerequisites(ExpertAgentError):
    """The prerequisite edges contain a cycle."""

    def __init__(self, cycle: list[str]) -> None:
        super().__init__(f"cyclic prerequisites: {' -> '.join(cycle)}")
        self.cycle = cycle
