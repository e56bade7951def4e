"""Durable storage: student JSON, trajectory JSONL, feedback CSV, course config.

Layout under one data root:

    course.json
    students/<student_id>.json
    trajectory/<student_id>.jsonl
    feedback.csv
    acceptance.csv

Student JSON is written canonically (sorted keys, sorted topic states,
two-space indent) through an atomic temp-file rename, so identical models
produce byte-identical files and readers never observe partial writes.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

from .corpus import Topic
from .errors import CorruptRecord, IoFailure, NotFound
from .feedback import AcceptanceCategory, AcceptanceResponse, FeedbackLevel, FeedbackRecord
from .graph import PrerequisiteGraph
from .quiz import DifficultyLevel, Question, QuestionKind
from .student_model import (
    BktParams,
    EventKind,
    StudentModel,
    TopicState,
    TrajectoryEvent,
    bkt_update,
)

FEEDBACK_COLUMNS = ("timestamp", "student_id", "level", "item_id", "rating", "comment")
ACCEPTANCE_COLUMNS = ("respondent_id", "category", "rating")


@dataclass(frozen=True)
class CourseConfig:
    course_id: str
    topics: list[Topic]
    prerequisite_edges: list[tuple[str, str]]
    question_bank: list[Question]
    document_paths: list[str] = field(default_factory=list)

    def graph(self) -> PrerequisiteGraph:
        return PrerequisiteGraph(
            nodes=tuple(t.topic_id for t in self.topics),
            edges=tuple(self.prerequisite_edges),
        )

    def labels(self) -> dict[str, str]:
        return {t.topic_id: t.label for t in self.topics}


def _write_atomic(path: Path, content: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(content, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"failed writing {path}: {exc}") from exc


def _parse_timestamp(value: Any, fieldname: str) -> datetime:
    if not isinstance(value, str):
        raise CorruptRecord(fieldname, "timestamp must be an ISO-8601 string")
    try:
        return datetime.fromisoformat(value)
    except ValueError as exc:
        raise CorruptRecord(fieldname, str(exc)) from exc


def _csv_field(value: str, *, force_quote: bool = False) -> str:
    if force_quote or any(ch in value for ch in ',"\n\r'):
        return '"' + value.replace('"', '""') + '"'
    return value


class DataDir:
    """Filesystem-backed store rooted at one directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "students").mkdir(exist_ok=True)
        (self.root / "trajectory").mkdir(exist_ok=True)

    @property
    def course_path(self) -> Path:
        return self.root / "course.json"

    def student_path(self, student_id: str) -> Path:
        return self.root / "students" / f"{student_id}.json"

    def trajectory_path(self, student_id: str) -> Path:
        return self.root / "trajectory" / f"{student_id}.jsonl"

    @property
    def feedback_path(self) -> Path:
        return self.root / "feedback.csv"

    @property
    def acceptance_path(self) -> Path:
        return self.root / "acceptance.csv"

    def student_exists(self, student_id: str) -> bool:
        return self.student_path(student_id).exists()

    # --- student model ----------------------------------------------------

    def save_student(self, model: StudentModel) -> Path:
        """Serialize the model canonically and write it atomically."""
        payload = {
            "student_id": model.student_id,
            "params": {
                "p_init": model.params.p_init,
                "slip": model.params.slip,
                "guess": model.params.guess,
                "transit": model.params.transit,
            },
            "topic_states": [
                _state_to_json(model.topic_states[topic_id])
                for topic_id in sorted(model.topic_states)
            ],
            "trajectory": [_event_to_json(event) for event in model.trajectory],
        }
        path = self.student_path(model.student_id)
        _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path

    def load_student(self, student_id: str) -> StudentModel:
        """Parse and re-validate a stored model; invariant violations are
        rejected with the failing field named."""
        path = self.student_path(student_id)
        if not path.exists():
            raise NotFound(f"no stored model for student {student_id!r}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptRecord("student_json", str(exc)) from exc
        return _model_from_json(payload)

    # --- trajectory -------------------------------------------------------

    def append_trajectory(self, student_id: str, event: TrajectoryEvent) -> int:
        path = self.trajectory_path(student_id)
        line = json.dumps(_event_to_json(event), sort_keys=True)
        try:
            with path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
        except OSError as exc:
            raise IoFailure(f"failed appending to {path}: {exc}") from exc
        with path.open("r", encoding="utf-8") as handle:
            return sum(1 for raw in handle if raw.strip())

    def read_trajectory(self, student_id: str) -> list[TrajectoryEvent]:
        path = self.trajectory_path(student_id)
        if not path.exists():
            return []
        events: list[TrajectoryEvent] = []
        with path.open("r", encoding="utf-8") as handle:
            for i, raw in enumerate(handle):
                if not raw.strip():
                    continue
                try:
                    events.append(_event_from_json(json.loads(raw), f"trajectory[{i}]"))
                except json.JSONDecodeError as exc:
                    raise CorruptRecord(f"trajectory[{i}]", str(exc)) from exc
        return events

    # --- feedback / acceptance CSV -----------------------------------------

    def append_feedback(self, rec: FeedbackRecord) -> int:
        """Append one CSV row; the comment field is always quoted."""
        ordinal = len(self.read_feedback()) + 1
        row = ",".join(
            (
                _csv_field(rec.at.isoformat()),
                _csv_field(rec.student_id),
                rec.level.value,
                _csv_field(rec.item_id),
                str(rec.rating),
                _csv_field(rec.comment or "", force_quote=True),
            )
        )
        self._append_csv(self.feedback_path, FEEDBACK_COLUMNS, row)
        return ordinal

    def read_feedback(self) -> list[FeedbackRecord]:
        rows = self._read_csv(self.feedback_path, FEEDBACK_COLUMNS)
        records = []
        for i, row in enumerate(rows):
            try:
                records.append(
                    FeedbackRecord(
                        at=_parse_timestamp(row[0], f"feedback[{i}].timestamp"),
                        student_id=row[1],
                        level=FeedbackLevel(row[2]),
                        item_id=row[3],
                        rating=int(row[4]),
                        comment=row[5] or None,
                    )
                )
            except ValueError as exc:
                raise CorruptRecord(f"feedback[{i}]", str(exc)) from exc
        return records

    def append_acceptance(self, resp: AcceptanceResponse) -> int:
        ordinal = len(self.read_acceptance()) + 1
        row = ",".join(
            (_csv_field(resp.respondent_id), resp.category.value, str(resp.rating))
        )
        self._append_csv(self.acceptance_path, ACCEPTANCE_COLUMNS, row)
        return ordinal

    def read_acceptance(self) -> list[AcceptanceResponse]:
        rows = self._read_csv(self.acceptance_path, ACCEPTANCE_COLUMNS)
        responses = []
        for i, row in enumerate(rows):
            try:
                responses.append(
                    AcceptanceResponse(
                        respondent_id=row[0],
                        category=AcceptanceCategory(row[1]),
                        rating=int(row[2]),
                    )
                )
            except ValueError as exc:
                raise CorruptRecord(f"acceptance[{i}]", str(exc)) from exc
        return responses

    def _append_csv(self, path: Path, columns: tuple[str, ...], row: str) -> None:
        try:
            fresh = not path.exists()
            with path.open("a", encoding="utf-8", newline="") as handle:
                if fresh:
                    handle.write(",".join(columns) + "\n")
                handle.write(row + "\n")
        except OSError as exc:
            raise IoFailure(f"failed appending to {path}: {exc}") from exc

    def _read_csv(self, path: Path, columns: tuple[str, ...]) -> list[list[str]]:
        if not path.exists():
            return []
        with path.open("r", encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows:
            return []
        if rows[0] != list(columns):
            raise CorruptRecord("csv_header", f"expected {','.join(columns)}")
        body = rows[1:]
        for i, row in enumerate(body):
            if len(row) != len(columns):
                raise CorruptRecord(f"csv_row[{i}]", f"expected {len(columns)} fields, got {len(row)}")
        return body


# --- student JSON codecs ----------------------------------------------------


def _state_to_json(state: TopicState) -> dict[str, Any]:
    return {
        "topic_id": state.topic_id,
        "mastery": state.mastery,
        "attempts": state.attempts,
        "correct_streak": state.correct_streak,
        "incorrect_streak": state.incorrect_streak,
        "last_outcome_at": state.last_outcome_at.isoformat() if state.last_outcome_at else None,
    }


def _event_to_json(event: TrajectoryEvent) -> dict[str, Any]:
    return {
        "at": event.at.isoformat(),
        "kind": event.kind.value,
        "topic_id": event.topic_id,
        "correct": event.correct,
        "mastery_after": event.mastery_after,
    }


def _event_from_json(obj: Any, fieldname: str) -> TrajectoryEvent:
    if not isinstance(obj, dict):
        raise CorruptRecord(fieldname, "event must be an object")
    try:
        kind = EventKind(obj.get("kind"))
    except ValueError:
        raise CorruptRecord(f"{fieldname}.kind", f"unknown kind {obj.get('kind')!r}") from None
    correct = obj.get("correct")
    if correct is not None and not isinstance(correct, bool):
        raise CorruptRecord(f"{fieldname}.correct", "must be boolean or null")
    mastery_after = obj.get("mastery_after")
    if mastery_after is not None:
        if (
            not isinstance(mastery_after, (int, float))
            or isinstance(mastery_after, bool)
            or not 0.0 <= mastery_after <= 1.0
        ):
            raise CorruptRecord(f"{fieldname}.mastery_after", "must be in [0, 1]")
    try:
        return TrajectoryEvent(
            at=_parse_timestamp(obj.get("at"), f"{fieldname}.at"),
            kind=kind,
            topic_id=str(obj.get("topic_id", "")),
            correct=correct,
            mastery_after=mastery_after,
        )
    except ValueError as exc:
        raise CorruptRecord(f"{fieldname}.correct", str(exc)) from exc


def _load_params(obj: Any) -> BktParams:
    if not isinstance(obj, dict):
        raise CorruptRecord("params", "must be an object")
    values = {}
    for name in ("p_init", "slip", "guess", "transit"):
        value = obj.get(name)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise CorruptRecord(f"params.{name}", "must be a number")
        values[name] = float(value)
    try:
        return BktParams(**values)
    except ValueError as exc:
        raise CorruptRecord("params", str(exc)) from exc


def _state_from_json(obj: Any) -> TopicState:
    if not isinstance(obj, dict) or not isinstance(obj.get("topic_id"), str) or not obj["topic_id"]:
        raise CorruptRecord("topic_states", "each state needs a topic_id")
    mastery = obj.get("mastery")
    if not isinstance(mastery, (int, float)) or isinstance(mastery, bool) or not 0.0 <= mastery <= 1.0:
        raise CorruptRecord("mastery", f"must be in [0, 1], got {mastery!r}")
    counters = {}
    for name in ("attempts", "correct_streak", "incorrect_streak"):
        value = obj.get(name, 0)
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise CorruptRecord(name, "must be a non-negative integer")
        counters[name] = value
    if counters["correct_streak"] > counters["attempts"] or counters["incorrect_streak"] > counters["attempts"]:
        raise CorruptRecord("attempts", "a streak cannot exceed attempts")
    if counters["correct_streak"] and counters["incorrect_streak"]:
        raise CorruptRecord("correct_streak", "at most one streak may be nonzero")
    last = obj.get("last_outcome_at")
    last_at = _parse_timestamp(last, "last_outcome_at") if last is not None else None
    return TopicState(
        topic_id=obj["topic_id"],
        mastery=float(mastery),
        last_outcome_at=last_at,
        **counters,
    )


def _model_from_json(payload: Any) -> StudentModel:
    if not isinstance(payload, dict):
        raise CorruptRecord("student_json", "top level must be an object")
    student_id = payload.get("student_id")
    if not isinstance(student_id, str) or not student_id:
        raise CorruptRecord("student_id", "must be a non-empty string")
    params = _load_params(payload.get("params"))
    states_raw = payload.get("topic_states")
    if not isinstance(states_raw, list) or not states_raw:
        raise CorruptRecord("topic_states", "must be a non-empty array")
    states: dict[str, TopicState] = {}
    for obj in states_raw:
        state = _state_from_json(obj)
        if state.topic_id in states:
            raise CorruptRecord("topic_states", f"duplicate topic {state.topic_id!r}")
        states[state.topic_id] = state
    events_raw = payload.get("trajectory", [])
    if not isinstance(events_raw, list):
        raise CorruptRecord("trajectory", "must be an array")
    events: list[TrajectoryEvent] = []
    previous: datetime | None = None
    for i, obj in enumerate(events_raw):
        event = _event_from_json(obj, f"trajectory[{i}]")
        try:
            out_of_order = previous is not None and event.at < previous
        except TypeError as exc:
            raise CorruptRecord(f"trajectory[{i}].at", "mixed naive and aware timestamps") from exc
        if out_of_order:
            raise CorruptRecord(f"trajectory[{i}].at", "timestamps must be non-decreasing")
        previous = event.at
        events.append(event)
    return StudentModel(student_id=student_id, params=params, topic_states=states, trajectory=events)


def replay_trajectory(events: list[TrajectoryEvent], params: BktParams) -> dict[str, float]:
    """Fold exercise outcomes through the knowledge-tracing update, from the
    initial prior, reproducing each topic's final mastery."""
    mastery: dict[str, float] = {}
    for event in events:
        if event.kind is not EventKind.EXERCISE_OUTCOME:
            continue
        current = mastery.get(event.topic_id, params.p_init)
        mastery[event.topic_id] = bkt_update(current, bool(event.correct), params)
    return mastery


# --- course config -----------------------------------------------------------


def _topic_from_json(obj: Any, fieldname: str) -> Topic:
    if not isinstance(obj, dict):
        raise CorruptRecord(fieldname, "topic must be an object")
    topic_id = obj.get("topic_id")
    label = obj.get("label")
    if not isinstance(topic_id, str) or not topic_id:
        raise CorruptRecord(f"{fieldname}.topic_id", "must be a non-empty string")
    if not isinstance(label, str) or not label:
        raise CorruptRecord(f"{fieldname}.label", "must be a non-empty string")
    sources = obj.get("source_doc_ids", [])
    if not isinstance(sources, list) or not all(isinstance(s, str) for s in sources):
        raise CorruptRecord(f"{fieldname}.source_doc_ids", "must be an array of strings")
    return Topic(topic_id=topic_id, label=label, source_doc_ids=tuple(sources))


def _question_from_json(obj: Any, fieldname: str) -> Question:
    if not isinstance(obj, dict):
        raise CorruptRecord(fieldname, "question must be an object")
    try:
        kind = QuestionKind(obj.get("kind"))
        difficulty = DifficultyLevel.from_label(str(obj.get("difficulty", "")))
    except ValueError as exc:
        raise CorruptRecord(fieldname, str(exc)) from None
    answer_key = obj.get("answer_key")
    if not isinstance(answer_key, (int, str)):
        raise CorruptRecord(f"{fieldname}.answer_key", "must be an index or a string")
    try:
        return Question(
            question_id=str(obj.get("question_id", "")),
            topic_id=str(obj.get("topic_id", "")),
            difficulty=difficulty,
            kind=kind,
            stem=str(obj.get("stem", "")),
            options=tuple(obj.get("options", ())),
            answer_key=answer_key,
            explanation=str(obj.get("explanation", "")),
        )
    except ValueError as exc:
        raise CorruptRecord(fieldname, str(exc)) from exc


def load_course(path: str | Path) -> CourseConfig:
    """Load and validate course.json: unique topics, acyclic prerequisites,
    and a question bank that references only known topics."""
    path = Path(path)
    if not path.exists():
        raise NotFound(f"course file {path} does not exist")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptRecord("course.json", str(exc)) from exc
    if not isinstance(payload, dict):
        raise CorruptRecord("course.json", "top level must be an object")

    course_id = payload.get("course_id")
    if not isinstance(course_id, str) or not course_id:
        raise CorruptRecord("course_id", "must be a non-empty string")

    topics_raw = payload.get("topics")
    if not isinstance(topics_raw, list) or not topics_raw:
        raise CorruptRecord("topics", "must be a non-empty array")
    topics = [_topic_from_json(obj, f"topics[{i}]") for i, obj in enumerate(topics_raw)]
    topic_ids = {t.topic_id for t in topics}
    if len(topic_ids) != len(topics):
        raise CorruptRecord("topics", "topic ids must be unique")

    edges_raw = payload.get("prerequisite_edges", [])
    if not isinstance(edges_raw, list):
        raise CorruptRecord("prerequisite_edges", "must be an array")
    edges: list[tuple[str, str]] = []
    for i, obj in enumerate(edges_raw):
        if not isinstance(obj, (list, tuple)) or len(obj) != 2:
            raise CorruptRecord(f"prerequisite_edges[{i}]", "must be a [prereq, dependent] pair")
        prereq, dependent = obj
        if prereq not in topic_ids or dependent not in topic_ids:
            raise CorruptRecord(f"prerequisite_edges[{i}]", f"unknown topic in ({prereq!r}, {dependent!r})")
        edges.append((str(prereq), str(dependent)))

    bank_raw = payload.get("question_bank", [])
    if not isinstance(bank_raw, list):
        raise CorruptRecord("question_bank", "must be an array")
    bank: list[Question] = []
    seen_questions: set[str] = set()
    for i, obj in enumerate(bank_raw):
        question = _question_from_json(obj, f"question_bank[{i}]")
        if question.topic_id not in topic_ids:
            raise CorruptRecord(f"question_bank[{i}].topic_id", f"unknown topic {question.topic_id!r}")
        if question.question_id in seen_questions:
            raise CorruptRecord(f"question_bank[{i}].question_id", "duplicate question id")
        seen_questions.add(question.question_id)
        bank.append(question)

    paths_raw = payload.get("document_paths", [])
    if not isinstance(paths_raw, list) or not all(isinstance(p, str) for p in paths_raw):
        raise CorruptRecord("document_paths", "must be an array of strings")

    config = CourseConfig(
        course_id=course_id,
        topics=topics,
        prerequisite_edges=edges,
        question_bank=bank,
        document_paths=list(paths_raw),
    )
    config.graph()  # raises CyclicPrerequisites on a cycle
    return config


def save_course(config: CourseConfig, path: str | Path) -> None:
    """Write course.json canonically (used by the ingest CLI)."""
    payload = {
        "course_id": config.course_id,
        "topics": [
            {"topic_id": t.topic_id, "label": t.label, "source_doc_ids": list(t.source_doc_ids)}
            for t in config.topics
        ],
        "prerequisite_edges": [list(edge) for edge in config.prerequisite_edges],
        "question_bank": [
            {
                "question_id": q.question_id,
                "topic_id": q.topic_id,
                "difficulty": q.difficulty.label,
                "kind": q.kind.value,
                "stem": q.stem,
                "options": list(q.options),
                "answer_key": q.answer_key,
                "explanation": q.explanation,
            }
            for q in config.question_bank
        ],
        "document_paths": list(config.document_paths),
    }
    _write_atomic(Path(path), json.dumps(payload, indent=2, sort_keys=True) + "\n")
