"""Multi-level feedback records and acceptance-survey aggregation."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import TYPE_CHECKING

from .errors import InvalidRating

if TYPE_CHECKING:
    from .persistence import DataDir


class FeedbackLevel(Enum):
    CHAT = "chat"
    TEACHING = "teaching"
    QUIZ = "quiz"


class AcceptanceCategory(Enum):
    PERFORMANCE_EXPECTANCY = "performance_expectancy"
    EFFORT_EXPECTANCY = "effort_expectancy"
    SOCIAL_INFLUENCE = "social_influence"
    FACILITATING_CONDITIONS = "facilitating_conditions"


def _check_rating(rating: int) -> None:
    if isinstance(rating, bool) or not isinstance(rating, int) or not 1 <= rating <= 5:
        raise InvalidRating(f"rating must be an integer in [1, 5], got {rating!r}")


@dataclass(frozen=True)
class FeedbackRecord:
    at: datetime
    student_id: str
    level: FeedbackLevel
    item_id: str
    rating: int
    comment: str | None = None

    def __post_init__(self) -> None:
        _check_rating(self.rating)


@dataclass(frozen=True)
class AcceptanceResponse:
    respondent_id: str
    category: AcceptanceCategory
    rating: int

    def __post_init__(self) -> None:
        _check_rating(self.rating)


@dataclass(frozen=True)
class LevelSummary:
    count: int
    mean: float


@dataclass(frozen=True)
class CategoryAverages:
    means: dict[AcceptanceCategory, float]
    counts: dict[AcceptanceCategory, int]


def mean_half_up(total: int, count: int) -> float:
    """Exact rational mean rounded half-up at two decimals."""
    quotient = Decimal(total) / Decimal(count)
    return float(quotient.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def record_feedback(store: "DataDir", rec: FeedbackRecord) -> int:
    """Append the record durably; returns its ordinal in the feedback log."""
    return store.append_feedback(rec)


def summarize_by_level(records: list[FeedbackRecord]) -> dict[FeedbackLevel, LevelSummary]:
    """Per-level count and mean rating; levels with no records are omitted."""
    totals: dict[FeedbackLevel, int] = {}
    counts: dict[FeedbackLevel, int] = {}
    for rec in records:
        totals[rec.level] = totals.get(rec.level, 0) + rec.rating
        counts[rec.level] = counts.get(rec.level, 0) + 1
    return {
        level: LevelSummary(count=counts[level], mean=mean_half_up(totals[level], counts[level]))
        for level in counts
    }


def aggregate_acceptance(responses: list[AcceptanceResponse]) -> CategoryAverages:
    """Per-category mean rating; categories with no responses are omitted."""
    totals: dict[AcceptanceCategory, int] = {}
    counts: dict[AcceptanceCategory, int] = {}
    for resp in responses:
        totals[resp.category] = totals.get(resp.category, 0) + resp.rating
        counts[resp.category] = counts.get(resp.category, 0) + 1
    return CategoryAverages(
        means={cat: mean_half_up(totals[cat], counts[cat]) for cat in counts},
        counts=dict(counts),
    )
