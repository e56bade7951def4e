"""Per-student knowledge state: Bayesian knowledge tracing and mastery maps.

Each topic carries a mastery probability that a two-state model updates
after every graded exercise. Chat turns and lesson views are logged in the
trajectory but never move mastery; only graded evidence does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .corpus import Topic
from .errors import DegenerateDenominator, MissingTopicState, NoTopics, UnknownTopic
from .graph import PrerequisiteGraph, topological_order

MASTERED_THRESHOLD = 0.85
WEAK_THRESHOLD = 0.40
WEAK_MIN_ATTEMPTS = 3


class MasteryState(Enum):
    """The four reportable states; serialized names are the color legend's."""

    UNTOUCHED = "Untouched"
    LEARNING = "Learning"
    MASTERED = "Mastered"
    WEAK = "Weak"


class EventKind(Enum):
    EXERCISE_OUTCOME = "exercise_outcome"
    CHAT_INTERACTION = "chat_interaction"
    LESSON_VIEWED = "lesson_viewed"


@dataclass(frozen=True)
class BktParams:
    """Knowledge-tracing parameters, one set per deployment."""

    p_init: float = 0.2
    slip: float = 0.1
    guess: float = 0.2
    transit: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 < self.p_init < 1.0:
            raise ValueError(f"p_init must be in (0, 1), got {self.p_init}")
        for name in ("slip", "guess", "transit"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {value}")
        if self.slip + self.guess >= 1.0:
            raise ValueError(f"slip + guess must be < 1, got {self.slip + self.guess}")


@dataclass
class TopicState:
    topic_id: str
    mastery: float
    attempts: int = 0
    correct_streak: int = 0
    incorrect_streak: int = 0
    last_outcome_at: datetime | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.mastery <= 1.0:
            raise ValueError(f"mastery must be in [0, 1], got {self.mastery}")
        if self.attempts < 0:
            raise ValueError("attempts must be >= 0")
        if self.correct_streak > self.attempts or self.incorrect_streak > self.attempts:
            raise ValueError("a streak cannot exceed attempts")
        if self.correct_streak and self.incorrect_streak:
            raise ValueError("at most one streak may be nonzero")


@dataclass(frozen=True)
class TrajectoryEvent:
    at: datetime
    kind: EventKind
    topic_id: str
    correct: bool | None = None
    mastery_after: float | None = None

    def __post_init__(self) -> None:
        if (self.correct is not None) != (self.kind is EventKind.EXERCISE_OUTCOME):
            raise ValueError("correct is present exactly for exercise outcomes")


@dataclass
class StudentModel:
    student_id: str
    params: BktParams
    topic_states: dict[str, TopicState]
    trajectory: list[TrajectoryEvent] = field(default_factory=list)


@dataclass(frozen=True)
class KnowledgeMapNode:
    topic_id: str
    label: str
    state: MasteryState
    mastery: float


@dataclass(frozen=True)
class KnowledgeMap:
    nodes: tuple[KnowledgeMapNode, ...]
    edges: tuple[tuple[str, str], ...]


def init_student(student_id: str, topics: list[Topic], params: BktParams) -> StudentModel:
    if not student_id:
        raise ValueError("student_id must be non-empty")
    if not topics:
        raise NoTopics("a student model needs at least one topic")
    states = {
        topic.topic_id: TopicState(topic_id=topic.topic_id, mastery=params.p_init)
        for topic in topics
    }
    return StudentModel(student_id=student_id, params=params, topic_states=states)


def bkt_update(p: float, correct: bool, params: BktParams) -> float:
    """One knowledge-tracing step: Bayes posterior on the observation, then
    the learning transition."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if correct:
        numerator = p * (1.0 - params.slip)
        denominator = numerator + (1.0 - p) * params.guess
    else:
        numerator = p * params.slip
        denominator = numerator + (1.0 - p) * (1.0 - params.guess)
    if denominator == 0.0:
        raise DegenerateDenominator(
            f"update denominator is zero at p={p}, correct={correct}"
        )
    posterior = numerator / denominator
    return posterior + (1.0 - posterior) * params.transit


def record_outcome(model: StudentModel, topic_id: str, correct: bool, at: datetime) -> StudentModel:
    """Fold one graded answer into the model and append a trajectory event."""
    state = model.topic_states.get(topic_id)
    if state is None:
        raise UnknownTopic(f"topic {topic_id!r} is not in the student model")
    state.mastery = bkt_update(state.mastery, correct, model.params)
    state.attempts += 1
    if correct:
        state.correct_streak += 1
        state.incorrect_streak = 0
    else:
        state.incorrect_streak += 1
        state.correct_streak = 0
    state.last_outcome_at = at
    model.trajectory.append(
        TrajectoryEvent(
            at=at,
            kind=EventKind.EXERCISE_OUTCOME,
            topic_id=topic_id,
            correct=correct,
            mastery_after=state.mastery,
        )
    )
    return model


def log_interaction(model: StudentModel, kind: EventKind, topic_id: str, at: datetime) -> StudentModel:
    """Append an ungraded event (chat, lesson view); mastery is unchanged."""
    if kind is EventKind.EXERCISE_OUTCOME:
        raise ValueError("exercise outcomes go through record_outcome")
    model.trajectory.append(TrajectoryEvent(at=at, kind=kind, topic_id=topic_id))
    return model


def classify_state(ts: TopicState) -> MasteryState:
    """Classify a topic state; the rules are evaluated in this order."""
    if ts.attempts == 0:
        return MasteryState.UNTOUCHED
    if ts.mastery >= MASTERED_THRESHOLD:
        return MasteryState.MASTERED
    if ts.attempts >= WEAK_MIN_ATTEMPTS and ts.mastery < WEAK_THRESHOLD:
        return MasteryState.WEAK
    return MasteryState.LEARNING


def knowledge_map(
    model: StudentModel,
    graph: PrerequisiteGraph,
    labels: dict[str, str] | None = None,
) -> KnowledgeMap:
    """Project the model onto the prerequisite graph for visualization.

    Node order is the graph's topological order (lexicographic tie-break);
    labels default to the topic id when no label mapping is supplied.
    """
    labels = labels or {}
    for node in graph.nodes:
        if node not in model.topic_states:
            raise MissingTopicState(f"graph node {node!r} has no topic state")
    nodes = tuple(
        KnowledgeMapNode(
            topic_id=topic_id,
            label=labels.get(topic_id, topic_id),
            state=classify_state(model.topic_states[topic_id]),
            mastery=model.topic_states[topic_id].mastery,
        )
        for topic_id in topological_order(graph)
    )
    return KnowledgeMap(nodes=nodes, edges=tuple(graph.edges))
