"""Practice sessions: assembly from the question bank, grading, review."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum, IntEnum

from .errors import AlreadyAnswered, InvalidOption, NoAnswers, NoQuestionsForTopic

DEFAULT_QUIZ_LENGTH = 5


class DifficultyLevel(IntEnum):
    EASY = 0
    MEDIUM = 1
    HARD = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "DifficultyLevel":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown difficulty {label!r}") from None


class QuestionKind(Enum):
    MULTIPLE_CHOICE = "multiple_choice"
    SHORT_ANSWER = "short_answer"


@dataclass(frozen=True)
class Question:
    question_id: str
    topic_id: str
    difficulty: DifficultyLevel
    kind: QuestionKind
    stem: str
    options: tuple[str, ...] = ()
    answer_key: int | str = ""
    explanation: str = ""

    def __post_init__(self) -> None:
        if self.kind is QuestionKind.MULTIPLE_CHOICE:
            if len(self.options) < 2:
                raise ValueError(f"question {self.question_id!r} needs >= 2 options")
            if not isinstance(self.answer_key, int) or isinstance(self.answer_key, bool):
                raise ValueError(f"question {self.question_id!r} needs an integer answer key")
            if not 0 <= self.answer_key < len(self.options):
                raise ValueError(f"question {self.question_id!r} answer key out of range")
        else:
            if not isinstance(self.answer_key, str) or not self.answer_key.strip():
                raise ValueError(f"question {self.question_id!r} needs a non-empty answer key")


@dataclass(frozen=True)
class AnswerRecord:
    question_id: str
    given: str
    correct: bool
    graded_at: datetime


@dataclass
class QuizSession:
    session_id: str
    student_id: str
    topic_id: str
    questions: list[Question]
    answers: dict[str, AnswerRecord] = field(default_factory=dict)
    started_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def record_answer(self, record: AnswerRecord) -> None:
        if record.question_id not in {q.question_id for q in self.questions}:
            raise ValueError(f"question {record.question_id!r} is not in this session")
        if record.question_id in self.answers:
            raise AlreadyAnswered(f"question {record.question_id!r} was already answered")
        self.answers[record.question_id] = record


@dataclass(frozen=True)
class TopicTally:
    total: int
    missed: int


@dataclass(frozen=True)
class ReviewItem:
    question: Question
    given: str
    correct: bool
    explanation: str


@dataclass(frozen=True)
class ReviewReport:
    session_id: str
    per_topic: dict[str, TopicTally]
    items: tuple[ReviewItem, ...]


def _fill_levels(level: DifficultyLevel) -> list[DifficultyLevel]:
    # Requested level first, then one easier, then one harder.
    order = [level]
    if level > DifficultyLevel.EASY:
        order.append(DifficultyLevel(level - 1))
    if level < DifficultyLevel.HARD:
        order.append(DifficultyLevel(level + 1))
    return order


def assemble_quiz(
    bank: list[Question],
    topic_id: str,
    n: int,
    level: DifficultyLevel,
    *,
    student_id: str = "",
    session_id: str | None = None,
    started_at: datetime | None = None,
) -> QuizSession:
    """Select up to n questions for a topic.

    The requested level is drained first in question-id order; shortfalls
    fill from one level easier, then one level harder.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    topical = [q for q in bank if q.topic_id == topic_id]
    if not topical:
        raise NoQuestionsForTopic(f"no questions for topic {topic_id!r}")
    selected: list[Question] = []
    for fill_level in _fill_levels(level):
        if len(selected) >= n:
            break
        at_level = sorted(
            (q for q in topical if q.difficulty == fill_level),
            key=lambda q: q.question_id,
        )
        selected.extend(at_level[: n - len(selected)])
    if session_id is None:
        digest = hashlib.sha256(
            "|".join([topic_id, level.label, str(n)] + [q.question_id for q in selected]).encode("utf-8")
        ).hexdigest()
        session_id = f"quiz-{digest[:12]}"
    return QuizSession(
        session_id=session_id,
        student_id=student_id,
        topic_id=topic_id,
        questions=selected,
        started_at=started_at or datetime.now(timezone.utc),
    )


def normalize_answer(text: str) -> str:
    """Trim, lowercase, and collapse internal whitespace runs to one space."""
    return " ".join(text.split()).lower()


def grade_answer(q: Question, given: str, *, graded_at: datetime | None = None) -> AnswerRecord:
    """Grade one answer: exact index match for multiple choice, normalized
    string equality for short answers."""
    if q.kind is QuestionKind.MULTIPLE_CHOICE:
        try:
            chosen = int(given.strip())
        except ValueError:
            raise InvalidOption(f"{given!r} is not an option index") from None
        if not 0 <= chosen < len(q.options):
            raise InvalidOption(f"option {chosen} out of range [0, {len(q.options)})")
        correct = chosen == q.answer_key
    else:
        correct = normalize_answer(given) == normalize_answer(str(q.answer_key))
    return AnswerRecord(
        question_id=q.question_id,
        given=given,
        correct=correct,
        graded_at=graded_at or datetime.now(timezone.utc),
    )


def review_session(session: QuizSession) -> ReviewReport:
    """Tally answered questions per topic; unanswered items are excluded."""
    if not session.answers:
        raise NoAnswers(f"session {session.session_id!r} has no recorded answers")
    totals: dict[str, int] = {}
    missed: dict[str, int] = {}
    items: list[ReviewItem] = []
    for question in session.questions:
        record = session.answers.get(question.question_id)
        if record is None:
            continue
        totals[question.topic_id] = totals.get(question.topic_id, 0) + 1
        if not record.correct:
            missed[question.topic_id] = missed.get(question.topic_id, 0) + 1
        items.append(
            ReviewItem(
                question=question,
                given=record.given,
                correct=record.correct,
                explanation=question.explanation,
            )
        )
    per_topic = {
        topic_id: TopicTally(total=totals[topic_id], missed=missed.get(topic_id, 0))
        for topic_id in totals
    }
    return ReviewReport(session_id=session.session_id, per_topic=per_topic, items=tuple(items))
