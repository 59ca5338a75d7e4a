"""Sampling-based mitigators: Reservoir, MINT-style pre-drawn indices,
PrIDE-style Bernoulli+FIFO, and plain Bernoulli (PARA)."""

from __future__ import annotations

from collections import deque

import numpy as np

from .base import Tracker


class ReservoirSampler(Tracker):
    """Hardware-friendly reservoir: tagged items, max-tag replacement.

    The first k items fill the reservoir with fresh U[0,1] tags; a later
    item whose tag undercuts the current maximum replaces that slot, so
    the reservoir always holds the items bearing the k smallest tags seen.

    In ``per_trefi`` mode the reservoir empties into each REF and restarts
    for the next tREFI (the DRAM-side deployment, k = the per-REF
    mitigation budget).  Whole-window mode keeps sampling and never
    surrenders rows; read ``items`` directly in algorithm-level tests.
    """

    name = "reservoir"

    def __init__(self, k: int, rng: np.random.Generator | None = None, per_trefi: bool = True):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.rng = rng if rng is not None else np.random.default_rng()
        self.per_trefi = per_trefi
        self.items: list[int] = []
        self.tags: list[float] = []
        self._max_idx = -1

    def _rescan_max(self) -> None:
        self._max_idx = max(range(len(self.tags)), key=self.tags.__getitem__)

    def observe(self, row: int, tag: float) -> None:
        """Reservoir step with an externally supplied tag (for tests)."""
        if len(self.items) < self.k:
            self.items.append(row)
            self.tags.append(tag)
            if len(self.items) == self.k:
                self._rescan_max()
        elif tag < self.tags[self._max_idx]:
            self.items[self._max_idx] = row
            self.tags[self._max_idx] = tag
            self._rescan_max()

    def on_activation(self, row: int):
        self.observe(row, self.rng.random())
        return None

    def on_ref(self, slot_budget: int) -> list[int]:
        if not self.per_trefi:
            return []
        out = self.items[:slot_budget]
        self.reset()
        return out

    def estimate(self, row: int) -> None:
        return None

    def reset(self) -> None:
        self.items = []
        self.tags = []
        self._max_idx = -1


def mint_select(slot_rows, drawn: np.ndarray, max_slots: int) -> list[int]:
    """Rows of one tREFI at the pre-drawn 1-based positions that exist.

    Positions beyond the actual slot length yield no sample (the drawn
    index pointed at an ACT that never arrived).
    """
    n = len(slot_rows)
    return [slot_rows[int(pos) - 1] for pos in drawn if 1 <= int(pos) <= min(n, max_slots)]


class MintSampler(Tracker):
    """Pre-draws k uniform ACT positions in [1, max_slots] per tREFI.

    Uniform over ACTs only when the tREFI is full; a shorter slot leaves
    some drawn positions pointing past the end, sampling nothing.
    """

    name = "mint"

    def __init__(self, k: int, max_slots: int = 73, rng: np.random.Generator | None = None):
        if k < 1 or max_slots < 1:
            raise ValueError("k and max_slots must be >= 1")
        self.k = k
        self.max_slots = max_slots
        self.rng = rng if rng is not None else np.random.default_rng()
        self._drawn: set[int] = set()
        self._pos = 0
        self._buffer: list[int] = []
        self._redraw()

    def _redraw(self) -> None:
        self._drawn = set(self.rng.integers(1, self.max_slots + 1, size=self.k).tolist())
        self._pos = 0
        self._buffer = []

    def on_activation(self, row: int):
        self._pos += 1
        if self._pos in self._drawn:
            self._buffer.append(row)
        return None

    def on_ref(self, slot_budget: int) -> list[int]:
        out = self._buffer[:slot_budget]
        self._redraw()
        return out

    def estimate(self, row: int) -> None:
        return None

    def reset(self) -> None:
        self._redraw()


class PrideSampler(Tracker):
    """Bernoulli(p) sampling into a FIFO buffer of fixed capacity.

    Overflow evicts the head; each REF dequeues and mitigates the head if
    one is present (a single address per REF).
    """

    name = "pride"

    def __init__(self, p: float, capacity: int, rng: np.random.Generator | None = None):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.p = p
        self.capacity = capacity
        self.rng = rng if rng is not None else np.random.default_rng()
        self.buffer: deque[int] = deque()
        self.evictions = 0

    def on_activation(self, row: int):
        if self.p > 0.0 and (self.p >= 1.0 or self.rng.random() < self.p):
            if len(self.buffer) == self.capacity:
                self.buffer.popleft()
                self.evictions += 1
            self.buffer.append(row)
        return None

    def on_ref(self, slot_budget: int) -> list[int]:
        if slot_budget < 1 or not self.buffer:
            return []
        return [self.buffer.popleft()]

    def estimate(self, row: int) -> None:
        return None

    def reset(self) -> None:
        self.buffer.clear()
        self.evictions = 0


class Para(Tracker):
    """Tracker-less Bernoulli mitigation: each ACT is mitigated in place
    with probability p, independent of any other state."""

    name = "para"

    def __init__(self, p: float, rng: np.random.Generator | None = None):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        self.p = p
        self.rng = rng if rng is not None else np.random.default_rng()

    def on_activation(self, row: int):
        if self.p > 0.0 and (self.p >= 1.0 or self.rng.random() < self.p):
            return [row]
        return None

    def on_ref(self, slot_budget: int) -> list[int]:
        return []

    def estimate(self, row: int) -> None:
        return None

    def reset(self) -> None:
        pass
