"""Uniform behavioral contract all trackers implement.

A tracker consumes one activation at a time (single pass), surrenders up
to ``slot_budget`` mitigation candidates at each REF, and exposes its
frequency estimate per row.  Trackers are single-threaded state machines;
run distinct instances on distinct threads if you need parallel sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BoundSpec:
    """Error bound of a frequency estimator.

    f_real - lower_margin <= f_est holds with probability lower_conf, and
    f_est <= f_real + upper_margin holds with probability upper_conf.
    """

    lower_margin: float
    upper_margin: float
    lower_conf: float = 1.0
    upper_conf: float = 1.0

    def __post_init__(self):
        if self.lower_margin < 0 or self.upper_margin < 0:
            raise ValueError("margins must be non-negative")
        for c in (self.lower_conf, self.upper_conf):
            if not 0.0 <= c <= 1.0:
                raise ValueError("confidences must lie in [0, 1]")


class Tracker:
    name = "tracker"

    def on_activation(self, row: int) -> list[int] | None:
        """Consume one ACT; may return rows to mitigate immediately (PARA)."""
        raise NotImplementedError

    def on_ref(self, slot_budget: int) -> list[int]:
        """Surrender at most slot_budget mitigation candidates at a REF."""
        raise NotImplementedError

    def estimate(self, row: int) -> int | None:
        """Estimated activation count for row, or None if untracked."""
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError

    def bound_spec(self) -> BoundSpec | None:
        """Current error bound, or None for pure samplers."""
        return None


class NullTracker(Tracker):
    """Tracks nothing and never mitigates; the undefended baseline."""

    name = "null"

    def on_activation(self, row):
        return None

    def on_ref(self, slot_budget):
        return []

    def estimate(self, row):
        return None

    def reset(self):
        pass


class ThrottleMisuseError(TypeError):
    """Throttling was paired with an estimator it cannot safely use."""


def throttle_account(tracker: Tracker, row: int, limit: int) -> bool:
    """Decide whether to block further ACTs on ``row`` (True = block).

    Throttling never modifies f_real, so no post-mitigation counter update
    is needed; it does require the estimator's lower bound on f_est to be
    deterministic, otherwise a quietly under-counted row slips through.
    """
    bound = tracker.bound_spec()
    if bound is None:
        raise ThrottleMisuseError(f"{tracker.name} exposes no frequency estimates")
    if bound.lower_conf < 1.0:
        raise ThrottleMisuseError(
            f"{tracker.name} has only a probabilistic lower bound "
            f"(confidence {bound.lower_conf:g})"
        )
    est = tracker.estimate(row)
    return est is not None and est >= limit
