"""CountMin-Sketch tracker with seeded 64-bit mixing hashes."""

from __future__ import annotations

import numpy as np

from .base import BoundSpec, Tracker

_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)


def mix64(x, seed):
    """SplitMix64-style finalizer of x xor seed; broadcasts over arrays."""
    with np.errstate(over="ignore"):
        z = np.asarray(x).astype(np.uint64) ^ np.asarray(seed, dtype=np.uint64)
        z = (z ^ (z >> np.uint64(30))) * _MUL1
        z = (z ^ (z >> np.uint64(27))) * _MUL2
        return z ^ (z >> np.uint64(31))


class CountMinSketch(Tracker):
    """depth x width counter grid; estimate is the minimum mapped counter.

    One seeded hash per sketch row, derived from the sketch seed.  The
    estimate never under-counts; on oblivious streams it over-counts by
    more than (2/width)*N with probability at most 2^-depth.

    Counters are never decremented after a mitigation (the upper bound is
    only probabilistic, so any decrement can lose information); rows whose
    estimate crosses ``trigger_threshold`` are queued for the next REF.
    """

    name = "countmin"

    def __init__(
        self,
        width: int,
        depth: int,
        seed: int | np.random.SeedSequence = 0,
        trigger_threshold: int | None = None,
    ):
        if width < 2 or depth < 1:
            raise ValueError("need width >= 2 and depth >= 1")
        self.width = width
        self.depth = depth
        seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        self.row_seeds = seq.generate_state(depth, dtype=np.uint64)
        self.counters = np.zeros((depth, width), dtype=np.int64)
        self.trigger_threshold = trigger_threshold
        self.n_seen = 0
        self._pending: list[int] = []
        self._depth_idx = np.arange(depth)

    def columns(self, row: int) -> np.ndarray:
        """Mapped counter column per sketch row."""
        return mix64(np.int64(row), self.row_seeds) % np.uint64(self.width)

    def on_activation(self, row: int):
        self.n_seen += 1
        cols = self.columns(row)
        self.counters[self._depth_idx, cols] += 1
        if (
            self.trigger_threshold is not None
            and row not in self._pending
            and int(self.counters[self._depth_idx, cols].min()) >= self.trigger_threshold
        ):
            self._pending.append(row)
        return None

    def update_many(self, rows: np.ndarray) -> None:
        """Bulk update for property tests; equivalent to repeated on_activation."""
        rows = np.asarray(rows, dtype=np.int64)
        for d in range(self.depth):
            cols = mix64(rows, self.row_seeds[d]) % np.uint64(self.width)
            np.add.at(self.counters[d], cols.astype(np.int64), 1)
        self.n_seen += rows.size

    def estimate(self, row: int) -> int:
        return int(self.counters[self._depth_idx, self.columns(row)].min())

    def estimate_many(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        est = np.full(rows.shape, np.iinfo(np.int64).max, dtype=np.int64)
        for d in range(self.depth):
            cols = mix64(rows, self.row_seeds[d]) % np.uint64(self.width)
            est = np.minimum(est, self.counters[d, cols.astype(np.int64)])
        return est

    def on_ref(self, slot_budget: int) -> list[int]:
        out = self._pending[:slot_budget]
        del self._pending[:slot_budget]
        return out

    def reset(self) -> None:
        self.counters[:] = 0
        self.n_seen = 0
        self._pending.clear()

    def epsilon(self) -> float:
        return 2.0 / self.width

    def delta(self) -> float:
        return 2.0 ** -self.depth

    def bound_spec(self) -> BoundSpec:
        return BoundSpec(
            lower_margin=0,
            upper_margin=self.epsilon() * self.n_seen,
            lower_conf=1.0,
            upper_conf=1.0 - self.delta(),
        )
