"""Instructional planning from the knowledge state.

Turns the student model into action: which topics to work on next, how
hard the next exercises should be, and what to review after a quiz. All
operations are pure; they read model and graph snapshots and never mutate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyText, UnknownTopic
from .graph import PrerequisiteGraph, topological_order
from .quiz import DifficultyLevel, ReviewReport
from .retrieval import RetrievalIndex, retrieve
from .student_model import MasteryState, StudentModel, TopicState, classify_state

UNLOCK_THRESHOLD = 0.5
STEP_UP_STREAK = 3
STEP_DOWN_STREAK = 2
ADVICE_SNIPPETS = 2

__all__ = [
    "PrerequisiteGraph",
    "DifficultyLevel",
    "RecommendationReason",
    "Recommendation",
    "AdviceEntry",
    "unlocked",
    "recommend_next",
    "adjust_difficulty",
    "learning_advice",
]


class RecommendationReason(Enum):
    WEAK_REMEDIATION = "weak_remediation"
    CONTINUE_LEARNING = "continue_learning"
    NEW_UNLOCKED = "new_unlocked"


@dataclass(frozen=True)
class Recommendation:
    topic_id: str
    reason: RecommendationReason
    mastery: float
    rank: int


@dataclass(frozen=True)
class AdviceEntry:
    topic_id: str
    message: str
    snippet_refs: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.snippet_refs) > ADVICE_SNIPPETS:
            raise ValueError("advice carries at most two snippet references")


def unlocked(graph: PrerequisiteGraph, model: StudentModel, topic_id: str) -> bool:
    """A topic is unlocked when every prerequisite sits at mastery >= 0.5."""
    if topic_id not in set(graph.nodes) or topic_id not in model.topic_states:
        raise UnknownTopic(f"topic {topic_id!r} is not in both graph and model")
    return all(
        model.topic_states[prereq].mastery >= UNLOCK_THRESHOLD
        for prereq in graph.prerequisites_of(topic_id)
        if prereq in model.topic_states
    )


def recommend_next(model: StudentModel, graph: PrerequisiteGraph, n: int) -> list[Recommendation]:
    """Rank the next topics to study.

    Three tiers: weak topics by ascending mastery, then unlocked learning
    topics by ascending mastery, then unlocked untouched topics in
    topological order. Mastered and locked topics never appear.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    states: dict[str, TopicState] = {}
    for topic_id in graph.nodes:
        state = model.topic_states.get(topic_id)
        if state is not None and unlocked(graph, model, topic_id):
            states[topic_id] = state

    def by_mastery(topic_ids: list[str]) -> list[str]:
        return sorted(topic_ids, key=lambda t: (states[t].mastery, t))

    classified = {topic_id: classify_state(state) for topic_id, state in states.items()}
    weak = by_mastery([t for t, s in classified.items() if s is MasteryState.WEAK])
    learning = by_mastery([t for t, s in classified.items() if s is MasteryState.LEARNING])
    untouched = [
        t for t in topological_order(graph)
        if t in classified and classified[t] is MasteryState.UNTOUCHED
    ]

    tiers = [
        (weak, RecommendationReason.WEAK_REMEDIATION),
        (learning, RecommendationReason.CONTINUE_LEARNING),
        (untouched, RecommendationReason.NEW_UNLOCKED),
    ]
    recommendations: list[Recommendation] = []
    for topic_ids, reason in tiers:
        for topic_id in topic_ids:
            if len(recommendations) == n:
                return recommendations
            recommendations.append(
                Recommendation(
                    topic_id=topic_id,
                    reason=reason,
                    mastery=states[topic_id].mastery,
                    rank=len(recommendations) + 1,
                )
            )
    return recommendations


def adjust_difficulty(ts: TopicState, current: DifficultyLevel) -> DifficultyLevel:
    """Streak hysteresis: three correct steps up, two incorrect steps down,
    clamped to the [Easy, Hard] range."""
    if ts.correct_streak >= STEP_UP_STREAK and current < DifficultyLevel.HARD:
        return DifficultyLevel(current + 1)
    if ts.incorrect_streak >= STEP_DOWN_STREAK and current > DifficultyLevel.EASY:
        return DifficultyLevel(current - 1)
    return current


def learning_advice(
    report: ReviewReport,
    index: RetrievalIndex | None,
    labels: dict[str, str] | None = None,
) -> list[AdviceEntry]:
    """One review pointer per missed topic, with up to two reference
    snippets retrieved for the topic label. Worst topics come first."""
    labels = labels or {}
    missed_topics = [
        (topic_id, tally) for topic_id, tally in report.per_topic.items() if tally.missed >= 1
    ]
    missed_topics.sort(key=lambda item: (-item[1].missed, item[0]))
    advice: list[AdviceEntry] = []
    for topic_id, tally in missed_topics:
        label = labels.get(topic_id, topic_id)
        refs: tuple[str, ...] = ()
        if index is not None and index.entries:
            try:
                refs = tuple(s.chunk_id for s in retrieve(index, label, ADVICE_SNIPPETS))
            except EmptyText:
                refs = ()
        advice.append(
            AdviceEntry(
                topic_id=topic_id,
                message=f"Review {label}: you missed {tally.missed} of {tally.total} questions.",
                snippet_refs=refs,
            )
        )
    return advice
