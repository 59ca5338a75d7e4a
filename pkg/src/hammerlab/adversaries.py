"""Adversarial activation patterns and benign baselines.

Each generator is pure given its parameters and seed.  Decoy rows are
drawn from the top of the address space, far from the target, so +/-1
blast-radius bookkeeping never aliases a decoy's victims with the
target's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    DEFAULT_GEOMETRY,
    DEFAULT_TIMING,
    ActivationStream,
    BankGeometry,
    StreamError,
    TimingParams,
    build_stream,
    max_acts_per_trefi,
    max_stream_len,
)
from .trackers.counter_table import Dsac

ATTACK_KINDS = (
    "ss_thrash",
    "dsac_invalidate",
    "dsac_stochastic",
    "single_target",
    "round_robin",
    "uniform_random",
)


def _decoy_rows(count: int, geometry: BankGeometry, target_row: int, seed=None) -> np.ndarray:
    """Distinct decoys from the top of the address space, optionally shuffled."""
    top = geometry.rows_per_bank
    span = min(max(4 * count, 64), top - 1)
    pool = np.arange(top - span, top, dtype=np.int64)
    pool = pool[np.abs(pool - target_row) > 1]
    if seed is not None:
        pool = np.random.default_rng(seed).permutation(pool)
    if pool.size < count:
        raise ValueError("address space too small for the requested decoy count")
    return pool[:count]


def gen_ss_thrash(
    capacity: int,
    reps: int,
    timing: TimingParams = DEFAULT_TIMING,
    trefis: int = 1,
    target_row: int = 0,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    seed=None,
) -> ActivationStream:
    """Round-robin over capacity+1 rows: (r0, r1, ..., rk)^reps per tREFI.

    One more row than the table holds, so every lookup misses at read
    time and the target is never resident when mitigation picks a row.
    """
    if capacity < 1 or reps < 1 or trefis < 1:
        raise ValueError("capacity, reps, trefis must be >= 1")
    per_trefi = (capacity + 1) * reps
    if per_trefi > max_acts_per_trefi(timing):
        raise StreamError(f"{per_trefi} ACTs do not fit one tREFI")
    rows = np.empty(capacity + 1, dtype=np.int64)
    rows[0] = target_row
    rows[1:] = _decoy_rows(capacity, geometry, target_row, seed)
    pattern = np.tile(rows, reps * trefis)
    return build_stream(pattern, per_trefi, timing)


def gen_dsac_invalidate(
    timing: TimingParams = DEFAULT_TIMING,
    capacity: int = 16,
    trefis: int = 64,
    target_row: int = 0,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    mitigations_per_ref: int = 1,
    seed=None,
    probe=None,
) -> ActivationStream:
    """Phase-changing pattern against post-mitigation invalidation.

    Per tREFI: a burst on the target sized by the table's current
    second-minimum count (so the re-inserted target blends in below the
    maximum), then round-robin rounds over the working set, substituting
    the target with a fresh row in the final pre-REF round so the target
    is never resident when the REF picks its victim.  The burst length is
    obtained from ``probe`` -- by default a shadow copy of the defense,
    which is deterministic under invalidation -- and grows as the pattern
    repeats.
    """
    if capacity < 2:
        raise ValueError("needs capacity >= 2")
    budget = max_acts_per_trefi(timing)
    if capacity + 1 > budget:
        raise StreamError("working set does not fit one tREFI")
    shadow = Dsac(capacity, technique_i=True, technique_ii=False)
    if probe is None:
        def probe():
            entries = shadow.table.entries()
            if not entries:
                return 0
            counts = sorted(c for _, c in entries)
            if not shadow.table.full:
                return counts[0]
            return counts[1] if len(counts) > 1 else counts[0]

    decoys = _decoy_rows(capacity - 1 + trefis, geometry, target_row, seed)
    ring = decoys[: capacity - 1]  # r15..r1 analogue
    fresh = decoys[capacity - 1 :]  # one substitute row per tREFI

    rows: list[int] = []
    refs: list[int] = []
    for i in range(trefis):
        est = shadow.table.get(target_row) or 0
        burst = min(max(probe() - est, 0), budget - capacity)
        rounds = (budget - burst) // capacity
        for r in [target_row] * burst:
            rows.append(r)
            shadow.on_activation(r)
        for j in range(rounds):
            last = j == rounds - 1
            tail = int(fresh[i]) if last else target_row
            for r in [int(d) for d in ring] + [tail]:
                rows.append(r)
                shadow.on_activation(r)
        refs.append(len(rows))
        shadow.on_ref(mitigations_per_ref)
    stream = ActivationStream(
        np.array(rows, dtype=np.int64), np.array(refs, dtype=np.int64), timing=timing
    )
    stream.validate()
    return stream


def gen_dsac_stochastic(
    timing: TimingParams = DEFAULT_TIMING,
    decoys: int = 16,
    per_row_budget: int = 33_000,
    target_budget: int | None = None,
    target_row: int = 0,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    seed=None,
) -> ActivationStream:
    """Phase-changing pattern against stochastic eviction.

    Phase 1 hammers each decoy in turn until every table entry carries a
    large count, pinning Min high; phase 2 hands every remaining ACT to
    the target, whose insertion probability is then only 1/(Min+1) per
    miss.
    """
    if per_row_budget < 1 or decoys < 1:
        raise ValueError("decoys and per_row_budget must be >= 1")
    if target_budget is None:
        target_budget = per_row_budget
    total = decoys * per_row_budget + target_budget
    if total > max_stream_len(timing):
        raise StreamError(f"budget {total} exceeds max stream length {max_stream_len(timing)}")
    decoy_rows = _decoy_rows(decoys, geometry, target_row, seed)
    pattern = np.concatenate(
        [
            np.repeat(decoy_rows, per_row_budget),
            np.full(target_budget, target_row, dtype=np.int64),
        ]
    )
    return build_stream(pattern, max_acts_per_trefi(timing), timing)


def gen_single_target(
    target_acts_per_trefi: int,
    total_acts_per_trefi: int,
    rh_th: int,
    timing: TimingParams = DEFAULT_TIMING,
    target_row: int = 0,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    placement: str = "head",
    decoy_pool: int = 1024,
    seed=None,
) -> ActivationStream:
    """Each tREFI carries `a` target ACTs plus n-a decoys, until the
    target has accumulated rh_th ACTs.  ``placement`` puts the target's
    ACTs at the head (default) or tail of each tREFI slot."""
    a, n = target_acts_per_trefi, total_acts_per_trefi
    if not 1 <= a <= n <= max_acts_per_trefi(timing):
        raise StreamError(f"need 1 <= a <= n <= {max_acts_per_trefi(timing)}")
    if placement not in ("head", "tail"):
        raise ValueError("placement must be 'head' or 'tail'")
    trefis = -(-rh_th // a)  # ceil
    decoy_rows = _decoy_rows(min(decoy_pool, max((n - a) * 4, 8)), geometry, target_row, seed)
    rows = np.empty(trefis * n, dtype=np.int64)
    d = 0
    for i in range(trefis):
        fill = decoy_rows[(d + np.arange(n - a)) % decoy_rows.size]
        d += n - a
        slot = np.concatenate([np.full(a, target_row, dtype=np.int64), fill])
        if placement == "tail":
            slot = slot[::-1]
        rows[i * n : (i + 1) * n] = slot
    return build_stream(rows, n, timing)


def gen_uniform_random(
    rows: int,
    length: int,
    seed,
    acts_per_trefi: int | None = None,
    timing: TimingParams = DEFAULT_TIMING,
) -> ActivationStream:
    """i.i.d. uniform rows at the configured rate (benign baseline)."""
    if length > max_stream_len(timing):
        raise StreamError("length exceeds max stream length")
    if acts_per_trefi is None:
        acts_per_trefi = max_acts_per_trefi(timing)
    rng = np.random.default_rng(seed)
    pattern = rng.integers(0, rows, size=length, dtype=np.int64)
    if length == 0:
        return ActivationStream(pattern, np.array([], dtype=np.int64), timing=timing)
    return build_stream(pattern, acts_per_trefi, timing)


@dataclass
class AttackSpec:
    """Declarative description of an attack, buildable into a stream."""

    kind: str
    table_capacity: int = 16
    target_row: int = 0
    acts_per_trefi: int | None = None
    target_acts_per_trefi: int = 1
    reps: int = 4
    trefis: int = 1
    decoys: int = 16
    per_row_budget: int = 33_000
    target_budget: int | None = None
    rh_th: int = 64
    rows: int = 1024
    length: int = 0
    placement: str = "head"
    seed: int | None = None
    timing: TimingParams = field(default=DEFAULT_TIMING)
    geometry: BankGeometry = field(default=DEFAULT_GEOMETRY)

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")

    def build(self, seed=None) -> ActivationStream:
        seed = self.seed if seed is None else seed
        if self.kind in ("ss_thrash", "round_robin"):
            return gen_ss_thrash(
                self.table_capacity, self.reps, self.timing, self.trefis,
                self.target_row, self.geometry, seed,
            )
        if self.kind == "dsac_invalidate":
            return gen_dsac_invalidate(
                self.timing, self.table_capacity, self.trefis,
                self.target_row, self.geometry, seed=seed,
            )
        if self.kind == "dsac_stochastic":
            return gen_dsac_stochastic(
                self.timing, self.decoys, self.per_row_budget, self.target_budget,
                self.target_row, self.geometry, seed,
            )
        if self.kind == "single_target":
            n = self.acts_per_trefi or max_acts_per_trefi(self.timing)
            return gen_single_target(
                self.target_acts_per_trefi, n, self.rh_th, self.timing,
                self.target_row, self.geometry, self.placement, seed=seed,
            )
        return gen_uniform_random(
            self.rows, self.length, seed, self.acts_per_trefi, self.timing
        )


def attack_from_config(cfg: dict, timing: TimingParams, geometry: BankGeometry) -> AttackSpec:
    """Build an AttackSpec from a plain key-value configuration section."""
    cfg = {k.strip(): str(v).strip() for k, v in cfg.items()}
    kind = cfg.get("kind")
    if kind is None:
        raise ValueError("attack section needs a 'kind' key")
    kwargs: dict = {"kind": kind, "timing": timing, "geometry": geometry}
    int_keys = (
        "table_capacity", "target_row", "acts_per_trefi", "target_acts_per_trefi",
        "reps", "trefis", "decoys", "per_row_budget", "target_budget",
        "rh_th", "rows", "length", "seed",
    )
    for key in int_keys:
        if key in cfg:
            kwargs[key] = int(cfg[key])
    if "placement" in cfg:
        kwargs["placement"] = cfg["placement"]
    return AttackSpec(**kwargs)
