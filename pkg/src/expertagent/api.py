"""JSON-over-HTTP service surface for the teaching loop.

Thin translation layer: request bodies are validated, engine errors are
mapped to status codes, and every response body carries a request_id for
trace correlation. GET endpoints never mutate persisted state.
"""

from __future__ import annotations

import uuid
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import errors
from .feedback import AcceptanceCategory, AcceptanceResponse, FeedbackLevel, FeedbackRecord
from .quiz import DifficultyLevel, Question, QuizSession
from .retrieval import RetrievedSnippet
from .service import ExpertAgentService
from .student_model import KnowledgeMap, StudentModel
from .tutor import ChatTurn, ContentType, LessonContent

_ERROR_STATUS: list[tuple[type[Exception], int]] = [
    (errors.UnknownStudent, 404),
    (errors.UnknownTopic, 404),
    (errors.UnknownSession, 404),
    (errors.NoQuestionsForTopic, 404),
    (errors.NotFound, 404),
    (errors.DuplicateStudent, 409),
    (errors.AlreadyAnswered, 409),
    (errors.ClientFailure, 502),
    (errors.UnparseableResponse, 502),
    (errors.MissingSection, 502),
    (errors.ExpertAgentError, 400),
]


def _status_for(exc: Exception) -> int:
    for exc_type, status in _ERROR_STATUS:
        if isinstance(exc, exc_type):
            return status
    return 500


class DocumentUpload(BaseModel):
    filename: str
    content: str


class CreateStudent(BaseModel):
    student_id: str


class ChatRequest(BaseModel):
    student_id: str
    question: str


class QuizAssembleRequest(BaseModel):
    student_id: str
    topic_id: str
    n: int = Field(default=5, ge=1)
    level: str | None = None


class QuizAnswerRequest(BaseModel):
    student_id: str
    session_id: str
    question_id: str
    given: str


class FeedbackRequest(BaseModel):
    student_id: str
    level: str
    item_id: str
    rating: int
    comment: str | None = None


class AcceptanceRequest(BaseModel):
    respondent_id: str
    category: str
    rating: int


def _snippet_json(snippet: RetrievedSnippet) -> dict[str, Any]:
    return {
        "chunk_id": snippet.chunk_id,
        "doc_id": snippet.doc_id,
        "text": snippet.text,
        "score": snippet.score,
        "rank": snippet.rank,
    }


def _turn_json(turn: ChatTurn) -> dict[str, Any]:
    return {
        "role": turn.role.value,
        "text": turn.text,
        "sources": list(turn.sources),
        "at": turn.at.isoformat() if turn.at else None,
    }


def _lesson_json(lesson: LessonContent) -> dict[str, Any]:
    return {
        "topic_id": lesson.topic_id,
        "content_type": lesson.content_type.value,
        "brief_summary": lesson.brief_summary,
        "definitions": lesson.definitions,
        "features": lesson.features,
        "importance": lesson.importance,
        "connections": lesson.connections,
        "examples": lesson.examples,
        "sources": list(lesson.sources),
        "ungrounded": lesson.ungrounded,
        "dropped_sources": lesson.dropped_sources,
    }


def _question_json(question: Question) -> dict[str, Any]:
    # Answer keys and explanations stay server-side until grading.
    return {
        "question_id": question.question_id,
        "topic_id": question.topic_id,
        "difficulty": question.difficulty.label,
        "kind": question.kind.value,
        "stem": question.stem,
        "options": list(question.options),
    }


def _session_json(session: QuizSession) -> dict[str, Any]:
    return {
        "session_id": session.session_id,
        "student_id": session.student_id,
        "topic_id": session.topic_id,
        "started_at": session.started_at.isoformat(),
        "questions": [_question_json(q) for q in session.questions],
    }


def _map_json(kmap: KnowledgeMap) -> dict[str, Any]:
    return {
        "nodes": [
            {
                "topic_id": node.topic_id,
                "label": node.label,
                "state": node.state.value,
                "mastery": node.mastery,
            }
            for node in kmap.nodes
        ],
        "edges": [list(edge) for edge in kmap.edges],
    }


def _model_json(model: StudentModel) -> dict[str, Any]:
    return {
        "student_id": model.student_id,
        "topics": [
            {"topic_id": ts.topic_id, "mastery": ts.mastery, "attempts": ts.attempts}
            for ts in (model.topic_states[t] for t in sorted(model.topic_states))
        ],
    }


def create_app(service: ExpertAgentService) -> FastAPI:
    app = FastAPI(title="expertagent", version="0.1.0")

    @app.middleware("http")
    async def stamp_request_id(request: Request, call_next):
        request.state.request_id = uuid.uuid4().hex[:12]
        response = await call_next(request)
        response.headers["X-Request-Id"] = request.state.request_id
        return response

    @app.exception_handler(errors.ExpertAgentError)
    async def engine_error_handler(request: Request, exc: errors.ExpertAgentError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={
                "error": type(exc).__name__,
                "detail": str(exc),
                "request_id": getattr(request.state, "request_id", ""),
            },
        )

    def ok(request: Request, payload: dict[str, Any]) -> dict[str, Any]:
        payload["request_id"] = request.state.request_id
        return payload

    @app.post("/documents")
    def upload_document(body: DocumentUpload, request: Request):
        doc, chunk_count, topics = service.ingest_document_bytes(
            body.content.encode("utf-8"), body.filename
        )
        return ok(
            request,
            {
                "document": {
                    "doc_id": doc.doc_id,
                    "title": doc.title,
                    "format": doc.format.value,
                    "ingested_at": doc.ingested_at.isoformat(),
                },
                "chunks": chunk_count,
                "topics": [{"topic_id": t.topic_id, "label": t.label} for t in topics],
            },
        )

    @app.get("/topics")
    def list_topics(request: Request):
        return ok(
            request,
            {"topics": [{"topic_id": t.topic_id, "label": t.label} for t in service.topics()]},
        )

    @app.post("/students")
    def create_student(body: CreateStudent, request: Request):
        model = service.create_student(body.student_id)
        return ok(request, {"student": _model_json(model)})

    @app.post("/chat")
    def chat(body: ChatRequest, request: Request):
        result = service.handle_chat(body.student_id, body.question)
        return ok(
            request,
            {
                "answer": _turn_json(result.answer),
                "snippets": [_snippet_json(s) for s in result.snippets],
                "ungrounded": result.ungrounded,
            },
        )

    @app.get("/lesson")
    def lesson(
        request: Request,
        student_id: str = Query(...),
        topic_id: str = Query(...),
        content_type: str = Query(ContentType.KNOWLEDGE_DETAILS.value),
    ):
        try:
            parsed_type = ContentType(content_type)
        except ValueError:
            raise errors.ExpertAgentError(f"unknown content_type {content_type!r}") from None
        result = service.handle_lesson(student_id, topic_id, parsed_type)
        return ok(
            request,
            {
                "lesson": _lesson_json(result.lesson),
                "snippets": [_snippet_json(s) for s in result.snippets],
            },
        )

    @app.post("/quiz/assemble")
    def quiz_assemble(body: QuizAssembleRequest, request: Request):
        level = None
        if body.level:
            try:
                level = DifficultyLevel.from_label(body.level)
            except ValueError as exc:
                raise errors.ExpertAgentError(str(exc)) from None
        session = service.assemble_quiz_for(body.student_id, body.topic_id, body.n, level)
        return ok(request, {"session": _session_json(session)})

    @app.post("/quiz/answer")
    def quiz_answer(body: QuizAnswerRequest, request: Request):
        result = service.answer_quiz_question(
            body.student_id, body.session_id, body.question_id, body.given
        )
        return ok(
            request,
            {
                "record": {
                    "question_id": result.record.question_id,
                    "given": result.record.given,
                    "correct": result.record.correct,
                    "graded_at": result.record.graded_at.isoformat(),
                },
                "mastery_after": result.mastery_after,
                "state_after": result.state_after.value,
                "explanation": result.explanation,
                "next_difficulty": result.next_difficulty.label,
            },
        )

    @app.get("/quiz/review")
    def quiz_review(request: Request, student_id: str = Query(...), session_id: str = Query(...)):
        report, advice = service.review_quiz(student_id, session_id)
        return ok(
            request,
            {
                "report": {
                    "session_id": report.session_id,
                    "per_topic": {
                        topic_id: {"total": tally.total, "missed": tally.missed}
                        for topic_id, tally in report.per_topic.items()
                    },
                    "items": [
                        {
                            "question_id": item.question.question_id,
                            "stem": item.question.stem,
                            "given": item.given,
                            "correct": item.correct,
                            "explanation": item.explanation,
                        }
                        for item in report.items
                    ],
                },
                "advice": [
                    {
                        "topic_id": entry.topic_id,
                        "message": entry.message,
                        "snippet_refs": list(entry.snippet_refs),
                    }
                    for entry in advice
                ],
            },
        )

    @app.get("/students/{student_id}/knowledge-map")
    def student_knowledge_map(student_id: str, request: Request):
        return ok(request, _map_json(service.knowledge_map_for(student_id)))

    @app.get("/students/{student_id}/recommendations")
    def student_recommendations(student_id: str, request: Request, n: int = Query(3, ge=1)):
        recommendations = service.recommendations_for(student_id, n)
        return ok(
            request,
            {
                "recommendations": [
                    {
                        "topic_id": rec.topic_id,
                        "reason": rec.reason.value,
                        "mastery": rec.mastery,
                        "rank": rec.rank,
                    }
                    for rec in recommendations
                ]
            },
        )

    @app.post("/feedback")
    def post_feedback(body: FeedbackRequest, request: Request):
        try:
            level = FeedbackLevel(body.level)
        except ValueError:
            raise errors.ExpertAgentError(f"unknown feedback level {body.level!r}") from None
        rec = FeedbackRecord(
            at=service.now(),
            student_id=body.student_id,
            level=level,
            item_id=body.item_id,
            rating=body.rating,
            comment=body.comment,
        )
        return ok(request, {"ordinal": service.submit_feedback(rec)})

    @app.post("/acceptance")
    def post_acceptance(body: AcceptanceRequest, request: Request):
        try:
            category = AcceptanceCategory(body.category)
        except ValueError:
            raise errors.ExpertAgentError(f"unknown category {body.category!r}") from None
        resp = AcceptanceResponse(
            respondent_id=body.respondent_id, category=category, rating=body.rating
        )
        return ok(request, {"ordinal": service.submit_acceptance(resp)})

    @app.get("/feedback/summary")
    def feedback_summary(request: Request):
        return ok(request, {"levels": service.feedback_summary()})

    @app.get("/acceptance/summary")
    def acceptance_summary(request: Request):
        averages = service.acceptance_summary()
        return ok(
            request,
            {
                "means": {cat.value: mean for cat, mean in averages.means.items()},
                "counts": {cat.value: count for cat, count in averages.counts.items()},
            },
        )

    return app
