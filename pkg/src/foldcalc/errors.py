"""Exception types shared across the engine."""

from __future__ import annotations


class FoldError(Exception):
    """Base class for engine errors."""


class CurveError(FoldError):
    """A word does not describe a valid embedded essential curve."""


class OrbitCapExceeded(FoldError):
    """A bounded word-rewriting search ran out of budget.

    This is an honest resource failure, never a wrong answer.
    """


class NotTransportable(FoldError):
    """Curve meets the surgered cycle; compare on the higher-genus side."""


class CoordinateSearchFailed(FoldError):
    """Change-of-coordinates search could not reach a standard position."""


class EmbeddingError(FoldError):
    """Rotation system does not describe a planar/spherical embedding."""


class DiagramError(FoldError):
    """Structurally malformed diagram data."""


class ParseError(FoldError):
    """Bad file or request payload; carries the offending field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class MeasureOnHigherSide(FoldError):
    """Decorations are only measurable from the higher-genus side."""


class AnchorError(FoldError):
    """Move anchors do not match the combinatorial pattern of the move."""


class RefusedMove(FoldError):
    """apply_* called without a Legal verdict, or the rewrite would leave
    the diagram invalid."""


class HypothesisViolation(FoldError):
    """A named hypothesis of the sweep planner fails."""

    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.name = name


class PlanningStuck(FoldError):
    """No applicable elementary move advances the sweep."""


class StepFailed(FoldError):
    """Script replay halted at a non-Legal step."""

    def __init__(self, index: int, verdict):
        super().__init__(f"script step {index} not Legal: {verdict}")
        self.index = index
        self.verdict = verdict
