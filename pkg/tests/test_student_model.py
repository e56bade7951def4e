from __future__ import annotations

import itertools
import random
from datetime import datetime, timedelta, timezone
from fractions import Fraction

import pytest

from expertagent.corpus import Topic
from expertagent.errors import DegenerateDenominator, MissingTopicState, NoTopics, UnknownTopic
from expertagent.graph import PrerequisiteGraph
from expertagent.student_model import (
    BktParams,
    EventKind,
    MasteryState,
    StudentModel,
    TopicState,
    TrajectoryEvent,
    bkt_update,
    classify_state,
    init_student,
    knowledge_map,
    log_interaction,
    record_outcome,
)

NOW = datetime(2026, 1, 1, tzinfo=timezone.utc)


def topics(*ids: str) -> list[Topic]:
    return [Topic(topic_id=i, label=i.title()) for i in ids]


def hmm_filter_oracle(outcomes: list[bool], params: BktParams) -> list[Fraction]:
    """Independent oracle: exact Bayes filtering of the two-state model by
    brute-force enumeration of every latent state path.

    State 1 emits a correct answer with probability 1 - slip, state 0 with
    probability guess; state 0 becomes state 1 with probability transit
    after each observation and state 1 never regresses. Returns the
    posterior probability of state 1 after each prefix of the outcomes.
    """
    p_init = Fraction(params.p_init)
    slip = Fraction(params.slip)
    guess = Fraction(params.guess)
    transit = Fraction(params.transit)

    results: list[Fraction] = []
    for prefix_len in range(1, len(outcomes) + 1):
        prefix = outcomes[:prefix_len]
        total = Fraction(0)
        mastered_mass = Fraction(0)
        for path in itertools.product((0, 1), repeat=prefix_len + 1):
            weight = p_init if path[0] == 1 else 1 - p_init
            for step, observed_correct in enumerate(prefix):
                state = path[step]
                if state == 1:
                    weight *= (1 - slip) if observed_correct else slip
                else:
                    weight *= guess if observed_correct else (1 - guess)
                nxt = path[step + 1]
                if state == 1:
                    weight *= 1 if nxt == 1 else 0
                else:
                    weight *= transit if nxt == 1 else (1 - transit)
                if weight == 0:
                    break
            if weight == 0:
                continue
            total += weight
            if path[-1] == 1:
                mastered_mass += weight
        results.append(mastered_mass / total)
    return results


# --- init_student -------------------------------------------------------------


def test_init_student_sets_prior_everywhere() -> None:
    model = init_student("s1", topics("a", "b", "c"), BktParams())
    assert len(model.topic_states) == 3
    assert all(ts.mastery == 0.2 and ts.attempts == 0 for ts in model.topic_states.values())
    assert model.trajectory == []


def test_init_student_no_topics_rejected() -> None:
    with pytest.raises(NoTopics):
        init_student("s1", [], BktParams())


def test_init_student_deterministic() -> None:
    a = init_student("s1", topics("a"), BktParams())
    b = init_student("s1", topics("a"), BktParams())
    assert a == b


# --- bkt_update -----------------------------------------------------------------


def test_bkt_update_correct_hand_value() -> None:
    # posterior 0.18/0.34, then + (1 - posterior) * 0.1 = 9.8/17 = 0.57647059 (8 dp)
    result = bkt_update(0.2, True, BktParams())
    posterior = 0.18 / 0.34
    assert result == pytest.approx(posterior + (1 - posterior) * 0.1, abs=1e-9)
    assert round(result, 8) == 0.57647059


def test_bkt_update_incorrect_hand_value() -> None:
    # posterior 0.02/0.66, then transition = 4.2/33 = 0.12727273 (8 dp)
    result = bkt_update(0.2, False, BktParams())
    posterior = 0.02 / 0.66
    assert result == pytest.approx(posterior + (1 - posterior) * 0.1, abs=1e-9)
    assert round(result, 8) == 0.12727273


def test_bkt_update_absorbing_state() -> None:
    assert bkt_update(1.0, True, BktParams(slip=0.0)) == 1.0


def test_bkt_update_degenerate_denominator() -> None:
    with pytest.raises(DegenerateDenominator):
        bkt_update(0.0, True, BktParams(guess=0.0))


def test_bkt_update_rejects_out_of_range() -> None:
    with pytest.raises(ValueError):
        bkt_update(1.5, True, BktParams())


def test_bkt_update_matches_enumeration_oracle() -> None:
    params = BktParams()
    for outcomes in itertools.product((True, False), repeat=3):
        oracle = hmm_filter_oracle(list(outcomes), params)
        p = params.p_init
        for step, correct in enumerate(outcomes):
            p = bkt_update(p, correct, params)
            assert p == pytest.approx(float(oracle[step]), abs=1e-9)


def test_bkt_update_monotone_direction_over_grid() -> None:
    params = BktParams()
    for i in range(1000):
        p = i / 999.0
        assert bkt_update(p, True, params) >= p - 1e-12
        assert bkt_update(p, False, params) <= p + params.transit + 1e-12
        # an incorrect answer never lifts the Bayes posterior above p
        up = bkt_update(p, False, BktParams(transit=0.0))
        assert up <= p + 1e-12


def test_bkt_update_bounded_for_random_valid_params() -> None:
    rng = random.Random(99)
    for _ in range(300):
        slip = rng.uniform(0.0, 0.89)
        guess = rng.uniform(0.0, min(0.89, 0.999 - slip - 1e-6))
        params = BktParams(
            p_init=rng.uniform(1e-6, 1 - 1e-6),
            slip=slip,
            guess=guess,
            transit=rng.uniform(0.0, 0.999),
        )
        p = rng.random()
        for correct in (True, False):
            try:
                result = bkt_update(p, correct, params)
            except DegenerateDenominator:
                continue
            assert 0.0 <= result <= 1.0


# --- record_outcome / trajectory ---------------------------------------------------


def test_record_outcome_first_correct() -> None:
    model = init_student("s1", topics("a"), BktParams())
    record_outcome(model, "a", True, NOW)
    state = model.topic_states["a"]
    assert state.mastery == pytest.approx(9.8 / 17, abs=1e-9)
    assert state.attempts == 1
    assert state.correct_streak == 1
    assert state.incorrect_streak == 0
    assert model.trajectory[-1].mastery_after == state.mastery
    assert model.trajectory[-1].kind is EventKind.EXERCISE_OUTCOME


def test_record_outcome_unknown_topic() -> None:
    model = init_student("s1", topics("a"), BktParams())
    with pytest.raises(UnknownTopic):
        record_outcome(model, "zzz", True, NOW)


def test_record_outcome_streak_bookkeeping() -> None:
    model = init_student("s1", topics("a"), BktParams())
    record_outcome(model, "a", True, NOW)
    record_outcome(model, "a", False, NOW + timedelta(seconds=1))
    state = model.topic_states["a"]
    assert state.attempts == 2
    assert state.correct_streak == 0
    assert state.incorrect_streak == 1


def test_trajectory_is_append_only() -> None:
    model = init_student("s1", topics("a", "b"), BktParams())
    snapshots = []
    for i, (topic, correct) in enumerate([("a", True), ("b", False), ("a", True)]):
        record_outcome(model, topic, correct, NOW + timedelta(seconds=i))
        snapshots.append(list(model.trajectory))
    log_interaction(model, EventKind.CHAT_INTERACTION, "", NOW + timedelta(seconds=9))
    snapshots.append(list(model.trajectory))
    for earlier, later in zip(snapshots, snapshots[1:]):
        assert later[: len(earlier)] == earlier


def test_log_interaction_does_not_touch_mastery() -> None:
    model = init_student("s1", topics("a"), BktParams())
    before = model.topic_states["a"].mastery
    log_interaction(model, EventKind.LESSON_VIEWED, "a", NOW)
    assert model.topic_states["a"].mastery == before
    assert model.trajectory[-1].correct is None


def test_trajectory_event_correct_iff_exercise() -> None:
    with pytest.raises(ValueError):
        TrajectoryEvent(at=NOW, kind=EventKind.CHAT_INTERACTION, topic_id="", correct=True)
    with pytest.raises(ValueError):
        TrajectoryEvent(at=NOW, kind=EventKind.EXERCISE_OUTCOME, topic_id="a", correct=None)


# --- classify_state -------------------------------------------------------------


def test_classify_untouched_regardless_of_mastery() -> None:
    assert classify_state(TopicState(topic_id="a", mastery=0.99)) is MasteryState.UNTOUCHED


def test_classify_mastered_at_threshold() -> None:
    ts = TopicState(topic_id="a", mastery=0.9, attempts=5, correct_streak=5)
    assert classify_state(ts) is MasteryState.MASTERED
    at_boundary = TopicState(topic_id="a", mastery=0.85, attempts=1, correct_streak=1)
    assert classify_state(at_boundary) is MasteryState.MASTERED


def test_classify_weak_needs_attempts() -> None:
    weak = TopicState(topic_id="a", mastery=0.25, attempts=4, incorrect_streak=4)
    assert classify_state(weak) is MasteryState.WEAK
    young = TopicState(topic_id="a", mastery=0.25, attempts=2, incorrect_streak=2)
    assert classify_state(young) is MasteryState.LEARNING


def test_classify_learning_between_thresholds() -> None:
    ts = TopicState(topic_id="a", mastery=0.5, attempts=3, correct_streak=1)
    assert classify_state(ts) is MasteryState.LEARNING


def test_classify_is_stable() -> None:
    ts = TopicState(topic_id="a", mastery=0.25, attempts=4, incorrect_streak=4)
    assert classify_state(ts) is classify_state(ts)


def test_exactly_four_states() -> None:
    assert {s.value for s in MasteryState} == {"Untouched", "Learning", "Mastered", "Weak"}
    assert len(MasteryState) == 4


# --- knowledge_map ----------------------------------------------------------------


def test_knowledge_map_empty() -> None:
    model = StudentModel(student_id="s1", params=BktParams(), topic_states={})
    kmap = knowledge_map(model, PrerequisiteGraph(nodes=(), edges=()))
    assert kmap.nodes == ()
    assert kmap.edges == ()


def test_knowledge_map_chain() -> None:
    model = init_student("s1", topics("a", "b"), BktParams())
    model.topic_states["a"].mastery = 0.9
    model.topic_states["a"].attempts = 3
    model.topic_states["a"].correct_streak = 3
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=(("a", "b"),))
    kmap = knowledge_map(model, graph, labels={"a": "Alpha", "b": "Beta"})
    assert [n.topic_id for n in kmap.nodes] == ["a", "b"]
    assert kmap.nodes[0].state is MasteryState.MASTERED
    assert kmap.nodes[0].label == "Alpha"
    assert kmap.nodes[1].state is MasteryState.UNTOUCHED
    assert kmap.edges == (("a", "b"),)


def test_knowledge_map_diamond_order() -> None:
    model = init_student("s1", topics("a", "b", "c", "d"), BktParams())
    graph = PrerequisiteGraph(
        nodes=("d", "c", "b", "a"),
        edges=(("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")),
    )
    kmap = knowledge_map(model, graph)
    assert [n.topic_id for n in kmap.nodes] == ["a", "b", "c", "d"]


def test_knowledge_map_missing_state_rejected() -> None:
    model = init_student("s1", topics("a"), BktParams())
    graph = PrerequisiteGraph(nodes=("a", "b"), edges=(("a", "b"),))
    with pytest.raises(MissingTopicState):
        knowledge_map(model, graph)


def test_topic_state_invariants() -> None:
    with pytest.raises(ValueError):
        TopicState(topic_id="a", mastery=1.5)
    with pytest.raises(ValueError):
        TopicState(topic_id="a", mastery=0.5, attempts=1, correct_streak=1, incorrect_streak=1)
    with pytest.raises(ValueError):
        TopicState(topic_id="a", mastery=0.5, attempts=0, correct_streak=1)


def test_bkt_params_invariants() -> None:
    with pytest.raises(ValueError):
        BktParams(p_init=0.0)
    with pytest.raises(ValueError):
        BktParams(slip=0.6, guess=0.5)
    with pytest.raises(ValueError):
        BktParams(transit=1.0)
