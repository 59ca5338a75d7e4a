"""Sticky-Sampling tracker: rate-adjusted sampling with a Compress phase."""

from __future__ import annotations

import math

import numpy as np

from .base import BoundSpec, Tracker


class StickySampling(Tracker):
    """Counting with probabilistic insertion and rate-halving compression.

    t = ceil((1/eps) * ln(1/(2*eps*delta))) sets the first window at 2t
    elements with sampling rate 1; each Compress halves the rate, doubles
    the window, and walks every counter down by a geometric(1/2) tail
    count, dropping entries that hit zero.  After a Compress the table is
    distributed exactly as if sampling had run at the new rate from the
    start, so estimates never exceed f_real, and rows with f_real >=
    eps*N survive with probability at least 1 - delta.
    """

    name = "sticky_sampling"

    def __init__(
        self,
        epsilon: float,
        delta: float,
        rng: np.random.Generator | None = None,
        trigger_threshold: int | None = None,
    ):
        if not 0 < epsilon <= 1 or not 0 < delta < 1:
            raise ValueError("need 0 < epsilon <= 1 and 0 < delta < 1")
        self.epsilon = epsilon
        self.delta = delta
        self.t = math.ceil((1.0 / epsilon) * math.log(1.0 / (2.0 * epsilon * delta)))
        self.rng = rng if rng is not None else np.random.default_rng()
        self.trigger_threshold = trigger_threshold
        self.entries: dict[int, int] = {}
        self.p_sample = 1.0
        self.window_width = 2 * self.t
        self.n_seen = 0

    def on_activation(self, row: int):
        self.n_seen += 1
        if row in self.entries:
            self.entries[row] += 1
        elif self.p_sample >= 1.0 or self.rng.random() < self.p_sample:
            self.entries[row] = 1
        if self.n_seen == self.window_width:
            self.compress()
            self.window_width *= 2
            self.p_sample /= 2.0
        return None

    def compress(self) -> None:
        """Decrement every counter by a geometric(1/2) number of tails."""
        if not self.entries:
            return
        rows = list(self.entries)
        # geometric(1/2) draws are flips-to-first-head; tails = draw - 1
        tails = self.rng.geometric(0.5, size=len(rows)) - 1
        for row, t in zip(rows, tails):
            c = self.entries[row] - int(t)
            if c <= 0:
                del self.entries[row]
            else:
                self.entries[row] = c

    def estimate(self, row: int) -> int | None:
        return self.entries.get(row)

    def on_ref(self, slot_budget: int) -> list[int]:
        ranked = sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))
        out = []
        for row, count in ranked[:slot_budget]:
            if self.trigger_threshold is not None and count < self.trigger_threshold:
                break
            out.append(row)
            del self.entries[row]
        return out

    def reset(self) -> None:
        self.entries.clear()
        self.p_sample = 1.0
        self.window_width = 2 * self.t
        self.n_seen = 0

    def bound_spec(self) -> BoundSpec:
        return BoundSpec(
            lower_margin=self.epsilon * self.n_seen,
            upper_margin=0,
            lower_conf=1.0 - self.delta,
            upper_conf=1.0,
        )
