"""Exact per-row activation counting (the PRAC-style tracker)."""

from __future__ import annotations

from .base import BoundSpec, Tracker


class ExactCounter(Tracker):
    """One counter per row; mitigation resets the row's counter to zero.

    Stored sparsely here, but sized as rows_per_bank in the area model.
    """

    name = "exact"

    def __init__(self, threshold: int):
        if threshold < 1:
            raise ValueError("threshold must be >= 1")
        self.threshold = threshold
        self.counts: dict[int, int] = {}
        self.n_seen = 0

    def on_activation(self, row: int):
        self.n_seen += 1
        self.counts[row] = self.counts.get(row, 0) + 1
        return None

    def rows_at_or_above(self, threshold: int) -> list[int]:
        return sorted(
            (r for r, c in self.counts.items() if c >= threshold),
            key=lambda r: (-self.counts[r], r),
        )

    def on_ref(self, slot_budget: int) -> list[int]:
        out = self.rows_at_or_above(self.threshold)[:slot_budget]
        for row in out:
            self.counts[row] = 0
        return out

    def estimate(self, row: int) -> int:
        return self.counts.get(row, 0)

    def reset(self) -> None:
        self.counts.clear()
        self.n_seen = 0

    def bound_spec(self) -> BoundSpec:
        return BoundSpec(lower_margin=0, upper_margin=0)
