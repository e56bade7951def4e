"""Orchestration of the teaching loop over all engine modules.

One service instance owns the corpus index, the per-student models and
session contexts, and the durable store. Mutations are serialized per
student; the retrieval index is immutable and swapped wholesale when the
corpus changes, so reads never block each other.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .corpus import Document, Topic, extract_topics, ingest_document, segment
from .errors import (
    DuplicateStudent,
    EmptyText,
    IoFailure,
    NoTopicsFound,
    NotFound,
    UnknownSession,
    UnknownStudent,
    UnknownTopic,
)
from .feedback import (
    AcceptanceResponse,
    CategoryAverages,
    FeedbackRecord,
    aggregate_acceptance,
    record_feedback,
    summarize_by_level,
)
from .persistence import CourseConfig, DataDir
from .planner import (
    AdviceEntry,
    Recommendation,
    adjust_difficulty,
    learning_advice,
    recommend_next,
)
from .quiz import (
    DEFAULT_QUIZ_LENGTH,
    AnswerRecord,
    DifficultyLevel,
    QuizSession,
    ReviewReport,
    assemble_quiz,
    grade_answer,
    review_session,
)
from .retrieval import RetrievalIndex, RetrievedSnippet, build_index, retrieve
from .student_model import (
    BktParams,
    EventKind,
    KnowledgeMap,
    MasteryState,
    StudentModel,
    classify_state,
    init_student,
    knowledge_map,
    log_interaction,
    record_outcome,
)
from .tutor import (
    ChatRole,
    ChatTurn,
    ContentType,
    LessonContent,
    LlmClient,
    StubLlmClient,
    answer_chat,
    build_lesson_prompt,
    parse_lesson,
)

DEFAULT_RETRIEVAL_K = 4
STARTING_DIFFICULTY = DifficultyLevel.EASY


@dataclass
class SessionContext:
    student_id: str
    course_id: str
    chat_history: list[ChatTurn] = field(default_factory=list)
    active_quiz: QuizSession | None = None
    current_difficulty: dict[str, DifficultyLevel] = field(default_factory=dict)
    ungrounded_turns: int = 0


@dataclass(frozen=True)
class ChatResult:
    answer: ChatTurn
    snippets: list[RetrievedSnippet]
    ungrounded: bool


@dataclass(frozen=True)
class LessonResult:
    lesson: LessonContent
    snippets: list[RetrievedSnippet]


@dataclass(frozen=True)
class QuizAnswerResult:
    record: AnswerRecord
    mastery_after: float
    state_after: MasteryState
    explanation: str
    next_difficulty: DifficultyLevel


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class ExpertAgentService:
    def __init__(
        self,
        store: DataDir,
        course: CourseConfig,
        client: LlmClient | None = None,
        *,
        params: BktParams | None = None,
        retrieval_k: int = DEFAULT_RETRIEVAL_K,
        course_base: str | Path | None = None,
        now: Callable[[], datetime] = _utc_now,
    ) -> None:
        self.store = store
        self.course = course
        self.client = client or StubLlmClient()
        self.params = params or BktParams()
        self.retrieval_k = retrieval_k
        self._now = now
        self._graph = course.graph()
        self._labels = course.labels()
        self._course_base = Path(course_base) if course_base else store.root
        self._documents: dict[str, Document] = {}
        self._index: RetrievalIndex | None = None
        self._models: dict[str, StudentModel] = {}
        self._sessions: dict[str, SessionContext] = {}
        self._registry_lock = threading.Lock()
        self._student_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self.load_course_documents()

    def now(self) -> datetime:
        return self._now()

    # --- corpus -------------------------------------------------------------

    def load_course_documents(self) -> int:
        """(Re)load every document listed in the course config and rebuild
        the retrieval index. Returns the number of documents loaded."""
        loaded: list[Document] = []
        for raw_path in self.course.document_paths:
            path = Path(raw_path)
            if not path.is_absolute():
                path = self._course_base / path
            loaded.append(ingest_document(path.read_bytes(), path.name))
        with self._registry_lock:
            self._documents = {doc.doc_id: doc for doc in loaded}
            self._rebuild_index()
        return len(self._documents)

    def ingest_document_bytes(self, raw: bytes, filename: str) -> tuple[Document, int, list[Topic]]:
        """Add one uploaded document to the live corpus and re-index.

        The upload grounds retrieval for this service's lifetime; durable
        corpus membership comes from the course config's document paths.
        """
        doc = ingest_document(raw, filename)
        try:
            topics = extract_topics(doc)
        except NoTopicsFound:
            topics = []
        with self._registry_lock:
            self._documents[doc.doc_id] = doc
            self._rebuild_index()
        return doc, len(segment(doc)), topics

    def _rebuild_index(self) -> None:
        chunks = [chunk for doc in self._documents.values() for chunk in segment(doc)]
        if not chunks:
            self._index = None
            return
        try:
            self._index = build_index(chunks)
        except EmptyText:
            self._index = None

    def _retrieve(self, query: str) -> list[RetrievedSnippet]:
        index = self._index
        if index is None or not index.entries:
            return []
        try:
            return retrieve(index, query, self.retrieval_k)
        except EmptyText:
            return []

    @property
    def index(self) -> RetrievalIndex | None:
        return self._index

    def topics(self) -> list[Topic]:
        return list(self.course.topics)

    # --- students -----------------------------------------------------------

    def create_student(self, student_id: str) -> StudentModel:
        with self._lock_for(student_id):
            if self.store.student_exists(student_id) or student_id in self._models:
                raise DuplicateStudent(f"student {student_id!r} already exists")
            model = init_student(student_id, self.course.topics, self.params)
            self.store.save_student(model)
            self._models[student_id] = model
            self._sessions[student_id] = SessionContext(
                student_id=student_id, course_id=self.course.course_id
            )
            return model

    def get_student(self, student_id: str) -> StudentModel:
        model = self._models.get(student_id)
        if model is None:
            try:
                model = self.store.load_student(student_id)
            except NotFound:
                raise UnknownStudent(f"unknown student {student_id!r}") from None
            self._models[student_id] = model
        return model

    def _lock_for(self, student_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._student_locks[student_id]

    def _session_for(self, student_id: str) -> SessionContext:
        session = self._sessions.get(student_id)
        if session is None:
            session = SessionContext(student_id=student_id, course_id=self.course.course_id)
            self._sessions[student_id] = session
        return session

    # --- teaching loop --------------------------------------------------------

    def handle_chat(self, student_id: str, question: str) -> ChatResult:
        model = self.get_student(student_id)
        session = self._session_for(student_id)
        snippets = self._retrieve(question) if question.strip() else []
        answer = answer_chat(question, snippets, session.chat_history, self.client, at=self._now())
        with self._lock_for(student_id):
            session.chat_history.append(
                ChatTurn(role=ChatRole.STUDENT, text=question, at=answer.at)
            )
            session.chat_history.append(answer)
            ungrounded = not answer.sources
            if ungrounded:
                session.ungrounded_turns += 1
            log_interaction(model, EventKind.CHAT_INTERACTION, "", answer.at)
            self.store.append_trajectory(student_id, model.trajectory[-1])
            self.store.save_student(model)
        return ChatResult(answer=answer, snippets=snippets, ungrounded=ungrounded)

    def handle_lesson(self, student_id: str, topic_id: str, content_type: ContentType) -> LessonResult:
        model = self.get_student(student_id)
        label = self._labels.get(topic_id)
        if label is None:
            raise UnknownTopic(f"topic {topic_id!r} is not in the course")
        topic = next(t for t in self.course.topics if t.topic_id == topic_id)
        snippets = self._retrieve(label)
        bundle = build_lesson_prompt(topic, content_type, snippets)
        raw = self.client.complete(bundle.text)
        lesson = parse_lesson(
            raw, content_type, topic_id=topic_id, allowed_sources=bundle.snippet_ids
        )
        with self._lock_for(student_id):
            at = self._now()
            log_interaction(model, EventKind.LESSON_VIEWED, topic_id, at)
            self.store.append_trajectory(student_id, model.trajectory[-1])
            self.store.save_student(model)
        return LessonResult(lesson=lesson, snippets=snippets)

    def assemble_quiz_for(
        self,
        student_id: str,
        topic_id: str,
        n: int = DEFAULT_QUIZ_LENGTH,
        level: DifficultyLevel | None = None,
    ) -> QuizSession:
        self.get_student(student_id)
        if topic_id not in self._labels:
            raise UnknownTopic(f"topic {topic_id!r} is not in the course")
        session = self._session_for(student_id)
        if level is None:
            level = session.current_difficulty.get(topic_id, STARTING_DIFFICULTY)
        with self._lock_for(student_id):
            quiz = assemble_quiz(
                self.course.question_bank,
                topic_id,
                n,
                level,
                student_id=student_id,
                started_at=self._now(),
            )
            session.active_quiz = quiz
        return quiz

    def answer_quiz_question(
        self, student_id: str, session_id: str, question_id: str, given: str
    ) -> QuizAnswerResult:
        model = self.get_student(student_id)
        session = self._session_for(student_id)
        quiz = session.active_quiz
        if quiz is None or quiz.session_id != session_id:
            raise UnknownSession(f"no active quiz session {session_id!r}")
        question = next((q for q in quiz.questions if q.question_id == question_id), None)
        if question is None:
            raise UnknownSession(f"session does not own question {question_id!r}")
        with self._lock_for(student_id):
            at = self._now()
            record = grade_answer(question, given, graded_at=at)
            quiz.record_answer(record)  # raises AlreadyAnswered before any model change
            record_outcome(model, question.topic_id, record.correct, at)
            state = model.topic_states[question.topic_id]
            current = session.current_difficulty.get(question.topic_id, STARTING_DIFFICULTY)
            next_difficulty = adjust_difficulty(state, current)
            try:
                self.store.append_trajectory(student_id, model.trajectory[-1])
                self.store.save_student(model)
            except IoFailure:
                # drop the in-memory mutations so the next read reflects the
                # last durable state
                quiz.answers.pop(question_id, None)
                self._models.pop(student_id, None)
                raise
            session.current_difficulty[question.topic_id] = next_difficulty
            return QuizAnswerResult(
                record=record,
                mastery_after=state.mastery,
                state_after=classify_state(state),
                explanation=question.explanation,
                next_difficulty=next_difficulty,
            )

    def review_quiz(self, student_id: str, session_id: str) -> tuple[ReviewReport, list[AdviceEntry]]:
        self.get_student(student_id)
        session = self._session_for(student_id)
        quiz = session.active_quiz
        if quiz is None or quiz.session_id != session_id:
            raise UnknownSession(f"no active quiz session {session_id!r}")
        report = review_session(quiz)
        advice = learning_advice(report, self._index, self._labels)
        return report, advice

    def knowledge_map_for(self, student_id: str) -> KnowledgeMap:
        model = self.get_student(student_id)
        return knowledge_map(model, self._graph, self._labels)

    def recommendations_for(self, student_id: str, n: int) -> list[Recommendation]:
        model = self.get_student(student_id)
        return recommend_next(model, self._graph, n)

    # --- feedback -------------------------------------------------------------

    def submit_feedback(self, rec: FeedbackRecord) -> int:
        return record_feedback(self.store, rec)

    def submit_acceptance(self, resp: AcceptanceResponse) -> int:
        return self.store.append_acceptance(resp)

    def feedback_summary(self) -> dict:
        summary = summarize_by_level(self.store.read_feedback())
        return {level.value: {"count": s.count, "mean": s.mean} for level, s in summary.items()}

    def acceptance_summary(self) -> CategoryAverages:
        return aggregate_acceptance(self.store.read_acceptance())
