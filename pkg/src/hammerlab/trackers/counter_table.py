"""Space-Saving counter table, its mitigation policies, and the DSAC variant."""

from __future__ import annotations

import numpy as np

from .base import BoundSpec, Tracker

POLICIES = ("none", "reset_zero", "decrement_to_min", "graphene_multiple", "invalidate")


class CounterTable:
    """Fixed-capacity table of (row, count) entries with stable slot order.

    Ties for min/max are broken by lowest slot index so replays are
    deterministic.  Capacities are small; minimum lookup is a plain scan.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._rows: list[int | None] = [None] * capacity
        self._counts: list[int] = [0] * capacity
        self._slot_of: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._slot_of)

    @property
    def full(self) -> bool:
        return len(self._slot_of) == self.capacity

    def __contains__(self, row: int) -> bool:
        return row in self._slot_of

    def get(self, row: int) -> int | None:
        slot = self._slot_of.get(row)
        return None if slot is None else self._counts[slot]

    def entries(self) -> list[tuple[int, int]]:
        """Valid (row, count) pairs in slot order."""
        return [(r, self._counts[i]) for i, r in enumerate(self._rows) if r is not None]

    def increment(self, row: int) -> int:
        slot = self._slot_of[row]
        self._counts[slot] += 1
        return self._counts[slot]

    def insert(self, row: int, count: int = 1) -> int:
        """Place row in the lowest free slot."""
        slot = self._rows.index(None)
        self._rows[slot] = row
        self._counts[slot] = count
        self._slot_of[row] = slot
        return slot

    def min_slot(self) -> int:
        best, best_count = -1, None
        for i, r in enumerate(self._rows):
            if r is not None and (best_count is None or self._counts[i] < best_count):
                best, best_count = i, self._counts[i]
        if best < 0:
            raise LookupError("empty table")
        return best

    def min_value(self) -> int:
        return 0 if not self._slot_of else self._counts[self.min_slot()]

    def max_slot(self) -> int:
        best, best_count = -1, None
        for i, r in enumerate(self._rows):
            if r is not None and (best_count is None or self._counts[i] > best_count):
                best, best_count = i, self._counts[i]
        if best < 0:
            raise LookupError("empty table")
        return best

    def replace(self, slot: int, row: int, count: int) -> int:
        """Swap a new row into ``slot``; returns the evicted row."""
        old = self._rows[slot]
        del self._slot_of[old]
        self._rows[slot] = row
        self._counts[slot] = count
        self._slot_of[row] = slot
        return old

    def invalidate(self, slot: int) -> None:
        row = self._rows[slot]
        if row is not None:
            del self._slot_of[row]
            self._rows[slot] = None
            self._counts[slot] = 0

    def set_count(self, slot: int, count: int) -> None:
        self._counts[slot] = count

    def slot_of(self, row: int) -> int:
        return self._slot_of[row]

    def row_at(self, slot: int) -> int | None:
        return self._rows[slot]

    def count_at(self, slot: int) -> int:
        return self._counts[slot]

    def top_slots(self, budget: int) -> list[int]:
        """Up to ``budget`` valid slots, highest count first, lowest slot on ties."""
        order = sorted(
            (i for i, r in enumerate(self._rows) if r is not None),
            key=lambda i: (-self._counts[i], i),
        )
        return order[:budget]

    def clear(self) -> None:
        self._rows = [None] * self.capacity
        self._counts = [0] * self.capacity
        self._slot_of.clear()


class SpaceSaving(Tracker):
    """Space-Saving heavy-hitter tracker (isomorphic to Misra-Gries).

    A hit increments its entry; a miss on a full table swaps the minimum
    entry's row and increments that count.  The estimate of an untracked
    row on a full table is the table minimum, giving the two readings

        f_real <= estimate(r)            <= f_real + floor(N/k)
        f_real - floor(N/k) <= mg_value(r) <= f_real.

    ``policy`` controls the post-mitigation counter update at each REF:

    * ``none``              -- refresh the victim, leave the count alone
    * ``reset_zero``        -- zero the count (only safe when the upper
                               bound is deterministic at f_real, which
                               Space-Saving's is not; kept for comparison)
    * ``decrement_to_min``  -- lower the count to the table minimum
    * ``graphene_multiple`` -- mitigate only when a count reaches an
                               integer multiple of ``graphene_threshold``,
                               never touching the count
    * ``invalidate``        -- drop the entry (DSAC technique i)
    """

    name = "space_saving"

    def __init__(
        self,
        capacity: int,
        policy: str = "decrement_to_min",
        graphene_threshold: int | None = None,
        trigger_threshold: int | None = None,
    ):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}")
        if graphene_threshold is None:
            graphene_threshold = trigger_threshold  # default to the configured target
        if policy == "graphene_multiple" and not graphene_threshold:
            raise ValueError("graphene_multiple needs a positive threshold")
        self.table = CounterTable(capacity)
        self.capacity = capacity
        self.policy = policy
        self.graphene_threshold = graphene_threshold
        self.trigger_threshold = trigger_threshold
        self.n_seen = 0
        self._pending: list[int] = []

    # -- stream side ------------------------------------------------------

    def _update_table(self, row: int) -> int | None:
        """Core Space-Saving update; returns the new count if row is tracked."""
        table = self.table
        if row in table:
            return table.increment(row)
        if not table.full:
            table.insert(row, 1)
            return 1
        slot = table.min_slot()
        table.replace(slot, row, table.count_at(slot) + 1)
        return table.count_at(slot)

    def on_activation(self, row: int):
        self.n_seen += 1
        count = self._update_table(row)
        if (
            self.policy == "graphene_multiple"
            and count is not None
            and count % self.graphene_threshold == 0
            and row not in self._pending
        ):
            self._pending.append(row)
        return None

    # -- REF side ----------------------------------------------------------

    def _apply_policy(self, slot: int) -> int:
        """Post-mitigation counter update for the entry at ``slot``."""
        table = self.table
        row = table.row_at(slot)
        if self.policy == "reset_zero":
            table.set_count(slot, 0)
        elif self.policy == "decrement_to_min":
            table.set_count(slot, table.min_value())
        elif self.policy == "invalidate":
            table.invalidate(slot)
        return row

    def mitigate_one(self) -> int | None:
        """Pick the max-count entry, apply the policy, return the row."""
        if self.policy == "graphene_multiple":
            return self._pending.pop(0) if self._pending else None
        if len(self.table) == 0:
            raise LookupError("mitigation on an empty table")
        return self._apply_policy(self.table.max_slot())

    def on_ref(self, slot_budget: int) -> list[int]:
        if self.policy == "graphene_multiple":
            out = self._pending[:slot_budget]
            del self._pending[:slot_budget]
            return out
        slots = self.table.top_slots(slot_budget)
        if self.trigger_threshold is not None:
            slots = [s for s in slots if self.table.count_at(s) >= self.trigger_threshold]
        return [self._apply_policy(s) for s in slots]

    # -- queries -----------------------------------------------------------

    def estimate(self, row: int) -> int:
        count = self.table.get(row)
        if count is not None:
            return count
        return self.table.min_value() if self.table.full else 0

    def mg_value(self, row: int) -> int:
        """Misra-Gries reading of the same table: estimate minus Min."""
        mn = self.table.min_value() if self.table.full else 0
        return max(0, self.estimate(row) - mn)

    def reset(self) -> None:
        self.table.clear()
        self._pending.clear()
        self.n_seen = 0

    def bound_spec(self) -> BoundSpec:
        margin = self.n_seen // self.capacity
        return BoundSpec(lower_margin=0, upper_margin=margin)


class Dsac(SpaceSaving):
    """Space-Saving with DSAC's two modifications.

    Technique i invalidates the mitigated entry at each REF; technique ii
    swaps a missing row in with probability 1/(Min+1) instead of always.
    With both flags off the behaviour is bit-identical to SpaceSaving.
    A `reset_to_one` variant of technique i is provided for completeness
    but is not calibrated against any reported number.
    """

    name = "dsac"

    def __init__(
        self,
        capacity: int,
        technique_i: bool = True,
        technique_ii: bool = True,
        policy: str = "none",
        rng: np.random.Generator | None = None,
        reset_to_one: bool = False,
    ):
        super().__init__(capacity, policy="none" if technique_i else policy)
        self.technique_i = technique_i
        self.technique_ii = technique_ii
        self.reset_to_one = reset_to_one
        self.rng = rng if rng is not None else np.random.default_rng()

    def _update_table(self, row: int) -> int | None:
        table = self.table
        if row in table:
            return table.increment(row)
        if not table.full:
            table.insert(row, 1)
            return 1
        slot = table.min_slot()
        if self.technique_ii:
            # swap probability inversely proportional to the current Min
            if self.rng.random() >= 1.0 / (table.count_at(slot) + 1):
                return None
        table.replace(slot, row, table.count_at(slot) + 1)
        return table.count_at(slot)

    def _apply_policy(self, slot: int) -> int:
        if not self.technique_i:
            return super()._apply_policy(slot)
        table = self.table
        row = table.row_at(slot)
        if self.reset_to_one:
            table.set_count(slot, 1)
        else:
            table.invalidate(slot)
        return row
