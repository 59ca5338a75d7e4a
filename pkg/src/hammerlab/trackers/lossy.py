"""Lossy-Counting tracker (classic max-error-annotation formulation)."""

from __future__ import annotations

import math

from .base import BoundSpec, Tracker


class LossyCounting(Tracker):
    """Windowed counting with per-entry max-error annotation.

    The stream is cut into windows of ceil(1/epsilon) elements.  A miss is
    inserted with annotation window_index-1 (the count it could have
    missed); at each window boundary, entries whose count plus annotation
    no longer clear the boundary are pruned.  Guarantees, deterministically,

        f_real - epsilon*N <= estimate <= f_real

    reading absent rows as 0.  The deterministic upper bound at f_real
    makes reset-to-zero a safe post-mitigation update.
    """

    name = "lossy_counting"

    def __init__(self, epsilon: float, trigger_threshold: int | None = None):
        if not 0 < epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        self.epsilon = epsilon
        self.window = math.ceil(1.0 / epsilon)
        self.entries: dict[int, list[int]] = {}  # row -> [count, annotation]
        self.trigger_threshold = trigger_threshold
        self.n_seen = 0

    def on_activation(self, row: int):
        self.n_seen += 1
        bucket = -(-self.n_seen // self.window)  # ceil
        entry = self.entries.get(row)
        if entry is not None:
            entry[0] += 1
        else:
            self.entries[row] = [1, bucket - 1]
        if self.n_seen % self.window == 0:
            self._prune(bucket)
        return None

    def _prune(self, bucket: int) -> None:
        dead = [r for r, (c, d) in self.entries.items() if c + d <= bucket]
        for r in dead:
            del self.entries[r]

    def estimate(self, row: int) -> int | None:
        entry = self.entries.get(row)
        return None if entry is None else entry[0]

    def on_ref(self, slot_budget: int) -> list[int]:
        ranked = sorted(self.entries.items(), key=lambda kv: (-kv[1][0], kv[0]))
        out = []
        for row, (count, _) in ranked[:slot_budget]:
            if self.trigger_threshold is not None and count < self.trigger_threshold:
                break
            out.append(row)
            del self.entries[row]  # reset-to-zero; a zero count prunes itself
        return out

    def reset(self) -> None:
        self.entries.clear()
        self.n_seen = 0

    def bound_spec(self) -> BoundSpec:
        return BoundSpec(lower_margin=self.epsilon * self.n_seen, upper_margin=0)
