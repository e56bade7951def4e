"""Adaptive tutoring engine with retrieval-grounded generation and a
continuously updated per-student knowledge model."""

__version__ = "0.1.0"
