"""DRAM timing constants, row-address geometry, and activation streams.

Everything downstream (trackers, adversaries, the simulator, the cost
model) consumes the two derived quantities defined here:

* ``max_acts_per_trefi`` -- how many ACT commands fit between two REFs,
* ``max_stream_len``     -- the worst-case number of ACTs in one refresh
  window (the stream length ``N`` used by every error bound).

All durations are integer nanoseconds so slot arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REF_MARKER = "#REF"


@dataclass(frozen=True)
class TimingParams:
    """JEDEC-style timing constants, in integer nanoseconds.

    ``refs_per_window`` is an explicit field rather than being derived
    from t_refw/t_refi, so alternate REF schedules are expressible.
    """

    t_rc: int = 48
    t_refi: int = 3_900
    t_refw: int = 32_000_000
    t_rfc: int = 350
    refs_per_window: int = 8192

    def __post_init__(self):
        if min(self.t_rc, self.t_refi, self.t_refw) <= 0:
            raise ValueError("t_rc, t_refi, t_refw must be strictly positive")
        if self.t_rfc < 0:
            raise ValueError("t_rfc must be non-negative")
        if not (self.t_rc <= self.t_refi <= self.t_refw):
            raise ValueError("need t_rc <= t_refi <= t_refw")
        if self.t_rfc > self.t_refi:
            raise ValueError("t_rfc must fit inside one tREFI")
        if self.refs_per_window < 0:
            raise ValueError("refs_per_window must be non-negative")
        # REF schedule consistency: the REFs must fit the window.
        if self.refs_per_window * self.t_refi > self.t_refw + self.t_refi:
            raise ValueError("refs_per_window inconsistent with t_refw/t_refi")
        if self.refs_per_window * self.t_rfc > self.t_refw:
            raise ValueError("refresh time exceeds the window")


@dataclass(frozen=True)
class BankGeometry:
    """Row-address space of one bank; address_bits feeds the area model."""

    rows_per_bank: int = 131_072

    def __post_init__(self):
        if self.rows_per_bank < 1:
            raise ValueError("rows_per_bank must be >= 1")

    @property
    def address_bits(self) -> int:
        return max(1, int(np.ceil(np.log2(self.rows_per_bank))))

    def check_row(self, row: int) -> int:
        if not 0 <= row < self.rows_per_bank:
            raise ValueError(f"row {row} outside [0, {self.rows_per_bank})")
        return row


DEFAULT_TIMING = TimingParams()
DEFAULT_GEOMETRY = BankGeometry()


def max_acts_per_trefi(timing: TimingParams) -> int:
    """ACT slots between two consecutive REFs: floor((tREFI - tRFC) / tRC)."""
    return (timing.t_refi - timing.t_rfc) // timing.t_rc


def max_stream_len(timing: TimingParams) -> int:
    """Worst-case ACTs per refresh window, the stream length N.

    floor((tREFW - refs_per_window * tRFC) / tRC); with the defaults this
    is (32ms - 8192 * 350ns) / 48ns = 606,933.
    """
    return (timing.t_refw - timing.refs_per_window * timing.t_rfc) // timing.t_rc


class StreamError(ValueError):
    pass


@dataclass
class ActivationStream:
    """An ordered single-pass sequence of row activations plus REF points.

    ``rows[i]`` is the bank-local row index of the i-th ACT.  ``ref_after``
    holds, for each REF in order, the number of events that precede it, so
    ``ref_after = [73, 146]`` means a REF fires after event 73 and another
    after event 146.  ``slot_pos`` optionally carries each event's 1-based
    position within its tREFI for position-sensitive samplers; by default
    a slot's ACTs sit at the head of the tREFI (positions 1..len).
    """

    rows: np.ndarray
    ref_after: np.ndarray
    slot_pos: np.ndarray | None = None
    timing: TimingParams = field(default=DEFAULT_TIMING)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.ref_after = np.asarray(self.ref_after, dtype=np.int64)
        if self.slot_pos is not None:
            self.slot_pos = np.asarray(self.slot_pos, dtype=np.int64)

    def __len__(self) -> int:
        return int(self.rows.size)

    def slot_lengths(self) -> np.ndarray:
        """Number of ACTs in each tREFI slot (one slot per REF)."""
        prev = np.concatenate(([0], self.ref_after[:-1]))
        return self.ref_after - prev

    def slot_positions(self) -> np.ndarray:
        """Per-event 1-based intra-slot position (head placement default)."""
        if self.slot_pos is not None:
            return self.slot_pos
        pos = np.ones(len(self), dtype=np.int64)
        start = 0
        for end in self.ref_after:
            pos[start:end] = np.arange(1, end - start + 1)
            start = int(end)
        pos[start:] = np.arange(1, len(self) - start + 1)
        return pos

    def validate(self) -> None:
        """Raise StreamError on any violated stream invariant."""
        limit = max_acts_per_trefi(self.timing)
        if len(self) > max_stream_len(self.timing):
            raise StreamError(
                f"stream has {len(self)} events, max is {max_stream_len(self.timing)}"
            )
        if self.ref_after.size:
            if np.any(np.diff(self.ref_after) < 0) or self.ref_after[0] < 0:
                raise StreamError("ref_after must be non-decreasing and non-negative")
            if self.ref_after[-1] > len(self):
                raise StreamError("REF boundary beyond end of stream")
            if np.any(self.slot_lengths() > limit):
                raise StreamError(f"a tREFI slot exceeds {limit} ACTs")
            if len(self) - int(self.ref_after[-1]) > limit:
                raise StreamError(f"trailing slot exceeds {limit} ACTs")
        elif len(self) > limit:
            raise StreamError(f"stream without REFs exceeds {limit} ACTs")

    def to_text(self) -> str:
        """Line format: one `<slot_index>,<row_index>` per event, #REF markers."""
        out = []
        boundaries = list(self.ref_after)
        b = 0
        for i, row in enumerate(self.rows):
            while b < len(boundaries) and boundaries[b] == i:
                out.append(REF_MARKER)
                b += 1
            out.append(f"{b},{int(row)}")
        while b < len(boundaries):
            out.append(REF_MARKER)
            b += 1
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str, timing: TimingParams = DEFAULT_TIMING) -> "ActivationStream":
        rows: list[int] = []
        refs: list[int] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line == REF_MARKER:
                refs.append(len(rows))
                continue
            if line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise StreamError(f"line {lineno}: expected '<slot>,<row>', got {raw!r}")
            slot, row = (int(p) for p in parts)
            if slot != len(refs):
                raise StreamError(f"line {lineno}: slot index {slot} disagrees with REF markers")
            rows.append(row)
        return cls(np.array(rows, dtype=np.int64), np.array(refs, dtype=np.int64), timing=timing)


def build_stream(
    pattern,
    acts_per_trefi: int,
    timing: TimingParams = DEFAULT_TIMING,
) -> ActivationStream:
    """Pack a row sequence into tREFI slots at the requested ACT rate.

    A REF boundary is inserted after every chunk of ``acts_per_trefi``
    events, including the final partial chunk.  The pattern is truncated
    at max_stream_len(timing).
    """
    limit = max_acts_per_trefi(timing)
    if not 1 <= acts_per_trefi <= limit:
        raise StreamError(f"acts_per_trefi must be in [1, {limit}], got {acts_per_trefi}")
    rows = np.asarray(pattern, dtype=np.int64)[: max_stream_len(timing)]
    n = rows.size
    n_slots = -(-n // acts_per_trefi)  # ceil
    refs = np.minimum(np.arange(1, n_slots + 1) * acts_per_trefi, n)
    stream = ActivationStream(rows, refs, timing=timing)
    stream.validate()
    return stream
