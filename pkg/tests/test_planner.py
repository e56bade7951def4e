from __future__ import annotations

import copy
import random
from datetime import datetime, timezone

import pytest

from expertagent.corpus import Chunk
from expertagent.errors import UnknownTopic
from expertagent.graph import PrerequisiteGraph
from expertagent.planner import (
    AdviceEntry,
    DifficultyLevel,
    RecommendationReason,
    adjust_difficulty,
    learning_advice,
    recommend_next,
    unlocked,
)
from expertagent.quiz import ReviewReport, TopicTally
from expertagent.retrieval import build_index
from expertagent.student_model import BktParams, MasteryState, StudentModel, TopicState, classify_state
from generators import random_dag, random_model

NOW = datetime(2026, 1, 1, tzinfo=timezone.utc)


def model_of(**masteries_and_attempts: tuple[float, int]) -> StudentModel:
    states = {}
    for topic_id, (mastery, attempts) in masteries_and_attempts.items():
        states[topic_id] = TopicState(
            topic_id=topic_id,
            mastery=mastery,
            attempts=attempts,
            incorrect_streak=attempts if attempts and mastery < 0.4 else 0,
            correct_streak=attempts if attempts and mastery >= 0.4 else 0,
        )
    return StudentModel(student_id="s1", params=BktParams(), topic_states=states)


# --- unlocked ------------------------------------------------------------------


def test_unlocked_without_prerequisites() -> None:
    graph = PrerequisiteGraph(nodes=("a",), edges=())
    assert unlocked(graph, model_of(a=(0.2, 0)), "a") is True


def test_unlocked_blocked_by_low_prereq() -> None:
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=(("a", "b"),))
    assert unlocked(graph, model_of(a=(0.2, 1), b=(0.2, 0)), "b") is False


def test_unlocked_boundary_inclusive() -> None:
    graph = PrerequisiteGraph(nodes=("a", "b", "c"), edges=(("a", "c"), ("b", "c")))
    model = model_of(a=(0.6, 2), b=(0.5, 2), c=(0.2, 0))
    assert unlocked(graph, model, "c") is True


def test_unlocked_unknown_topic() -> None:
    graph = PrerequisiteGraph(nodes=("a",), edges=())
    with pytest.raises(UnknownTopic):
        unlocked(graph, model_of(a=(0.2, 0)), "zzz")


# --- recommend_next ---------------------------------------------------------------


def test_single_weak_topic_is_rank_one() -> None:
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=())
    model = model_of(a=(0.25, 4), b=(0.5, 2))
    recs = recommend_next(model, graph, 2)
    assert recs[0].topic_id == "a"
    assert recs[0].reason is RecommendationReason.WEAK_REMEDIATION
    assert recs[0].rank == 1


def test_learning_sorted_by_ascending_mastery() -> None:
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=())
    model = model_of(a=(0.7, 2), b=(0.5, 2))
    recs = recommend_next(model, graph, 2)
    assert [r.topic_id for r in recs] == ["b", "a"]
    assert all(r.reason is RecommendationReason.CONTINUE_LEARNING for r in recs)


def test_chain_locks_dependent_untouched_topic() -> None:
    # mastery(a) = p_init = 0.2 < 0.5, so b stays locked.
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=(("a", "b"),))
    model = model_of(a=(0.2, 0), b=(0.2, 0))
    recs = recommend_next(model, graph, 2)
    assert [r.topic_id for r in recs] == ["a"]
    assert recs[0].reason is RecommendationReason.NEW_UNLOCKED


def test_mastered_topics_never_recommended() -> None:
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=())
    model = model_of(a=(0.9, 3), b=(0.5, 1))
    recs = recommend_next(model, graph, 5)
    assert [r.topic_id for r in recs] == ["b"]


def test_untouched_tier_in_topological_order() -> None:
    graph = PrerequisiteGraph(nodes=("c", "b", "a"), edges=())
    model = model_of(a=(0.2, 0), b=(0.2, 0), c=(0.2, 0))
    recs = recommend_next(model, graph, 3)
    assert [r.topic_id for r in recs] == ["a", "b", "c"]
    assert [r.rank for r in recs] == [1, 2, 3]


def test_tier_ordering_weak_then_learning_then_new() -> None:
    graph = PrerequisiteGraph(nodes=("w", "l", "u"), edges=())
    model = model_of(w=(0.2, 4), l=(0.6, 2), u=(0.2, 0))
    reasons = [r.reason for r in recommend_next(model, graph, 3)]
    assert reasons == [
        RecommendationReason.WEAK_REMEDIATION,
        RecommendationReason.CONTINUE_LEARNING,
        RecommendationReason.NEW_UNLOCKED,
    ]


def test_returns_fewer_than_n_when_pool_is_small() -> None:
    graph = PrerequisiteGraph(nodes=("a",), edges=())
    recs = recommend_next(model_of(a=(0.9, 5)), graph, 4)
    assert recs == []


def test_recommend_never_mutates_inputs() -> None:
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=(("a", "b"),))
    model = model_of(a=(0.7, 2), b=(0.2, 0))
    before = copy.deepcopy(model)
    recommend_next(model, graph, 2)
    unlocked(graph, model, "b")
    assert model == before


def test_safety_over_random_dags_small() -> None:
    rng = random.Random(20260808)
    reason_order = {
        RecommendationReason.WEAK_REMEDIATION: 0,
        RecommendationReason.CONTINUE_LEARNING: 1,
        RecommendationReason.NEW_UNLOCKED: 2,
    }
    for _ in range(50):
        graph = random_dag(rng)
        model = random_model(rng, graph)
        recs = recommend_next(model, graph, rng.randint(1, 10))
        for rec in recs:
            assert unlocked(graph, model, rec.topic_id)
            assert classify_state(model.topic_states[rec.topic_id]) is not MasteryState.MASTERED
        tiers = [reason_order[r.reason] for r in recs]
        assert tiers == sorted(tiers)
        assert [r.rank for r in recs] == list(range(1, len(recs) + 1))


# --- adjust_difficulty ---------------------------------------------------------------


def test_three_correct_steps_up() -> None:
    ts = TopicState(topic_id="a", mastery=0.6, attempts=3, correct_streak=3)
    assert adjust_difficulty(ts, DifficultyLevel.MEDIUM) is DifficultyLevel.HARD


def test_two_incorrect_steps_down_with_clamp() -> None:
    ts = TopicState(topic_id="a", mastery=0.2, attempts=2, incorrect_streak=2)
    assert adjust_difficulty(ts, DifficultyLevel.EASY) is DifficultyLevel.EASY
    assert adjust_difficulty(ts, DifficultyLevel.HARD) is DifficultyLevel.MEDIUM


def test_short_streak_keeps_level() -> None:
    ts = TopicState(topic_id="a", mastery=0.5, attempts=1, correct_streak=1)
    assert adjust_difficulty(ts, DifficultyLevel.MEDIUM) is DifficultyLevel.MEDIUM


def test_step_up_clamped_at_hard() -> None:
    ts = TopicState(topic_id="a", mastery=0.8, attempts=5, correct_streak=5)
    assert adjust_difficulty(ts, DifficultyLevel.HARD) is DifficultyLevel.HARD


def test_moves_at_most_one_level() -> None:
    for streak in (3, 10):
        ts = TopicState(topic_id="a", mastery=0.8, attempts=streak, correct_streak=streak)
        assert adjust_difficulty(ts, DifficultyLevel.EASY) is DifficultyLevel.MEDIUM


# --- learning_advice ------------------------------------------------------------------


def make_index():
    chunks = [
        Chunk(chunk_id="d#0", doc_id="d", ordinal=0, text="algebra balances equations", char_start=0, char_end=10),
        Chunk(chunk_id="d#1", doc_id="d", ordinal=1, text="algebra uses variables", char_start=10, char_end=20),
        Chunk(chunk_id="d#2", doc_id="d", ordinal=2, text="geometry studies shapes", char_start=20, char_end=30),
    ]
    return build_index(chunks)


def report_of(**tallies: tuple[int, int]) -> ReviewReport:
    return ReviewReport(
        session_id="q1",
        per_topic={t: TopicTally(total=total, missed=missed) for t, (total, missed) in tallies.items()},
        items=(),
    )


def test_no_misses_no_advice() -> None:
    assert learning_advice(report_of(algebra=(3, 0)), make_index()) == []


def test_advice_message_template() -> None:
    advice = learning_advice(
        report_of(algebra=(3, 2)), make_index(), labels={"algebra": "Algebra"}
    )
    assert len(advice) == 1
    assert advice[0].message == "Review Algebra: you missed 2 of 3 questions."
    assert advice[0].topic_id == "algebra"
    assert 1 <= len(advice[0].snippet_refs) <= 2
    assert set(advice[0].snippet_refs) <= {"d#0", "d#1", "d#2"}


def test_advice_ordered_by_miss_count() -> None:
    advice = learning_advice(
        report_of(algebra=(3, 1), geometry=(4, 3)), make_index()
    )
    assert [a.topic_id for a in advice] == ["geometry", "algebra"]


def test_advice_without_index_has_no_refs() -> None:
    advice = learning_advice(report_of(algebra=(2, 1)), None)
    assert advice[0].snippet_refs == ()


def test_advice_entry_limits_refs() -> None:
    with pytest.raises(ValueError):
        AdviceEntry(topic_id="a", message="m", snippet_refs=("x", "y", "z"))
