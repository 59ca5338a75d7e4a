"""Drives an ActivationStream through a tracker under the REF schedule.

The simulator maintains the ground-truth oracle (per-row activation
counts since the last mitigation or window boundary), applies the
tracker's mitigation decisions at each REF, and reports security
metrics.  Monte Carlo helpers estimate attack success probabilities with
Wilson confidence intervals; the heavily-trialled sampler and DSAC
estimators have vectorized fast paths that are distribution-identical to
driving the trackers event by event (asserted by the test suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adversaries import AttackSpec
from .model import DEFAULT_TIMING, ActivationStream, TimingParams, max_acts_per_trefi
from .trackers import Tracker, tracker_from_config
from .trackers.counter_table import Dsac


@dataclass(frozen=True)
class SimConfig:
    timing: TimingParams = field(default=DEFAULT_TIMING)
    rh_th: int = 4800
    mitigations_per_ref: int = 1
    table_reset: str = "none"  # none | per_window
    target_threshold_rule: str = "quarter"  # quarter | half
    seed: int = 0

    def __post_init__(self):
        if self.rh_th < 1:
            raise ValueError("rh_th must be >= 1")
        if self.mitigations_per_ref < 0:
            raise ValueError("mitigations_per_ref must be >= 0")
        if self.table_reset not in ("none", "per_window"):
            raise ValueError("table_reset must be 'none' or 'per_window'")
        if self.target_threshold_rule not in ("quarter", "half"):
            raise ValueError("target_threshold_rule must be 'quarter' or 'half'")

    def target_threshold(self) -> float:
        """The epsilon*N target this experiment budgets for (RH_TH/4, or
        RH_TH/2 for reset-free exact counting)."""
        div = 4 if self.target_threshold_rule == "quarter" else 2
        return self.rh_th / div


@dataclass
class SimReport:
    max_unmitigated: dict[int, int]
    bitflip_rows: list[int]
    total_mitigations: int
    mitigations_on_target: int
    refs: int
    mitigation_log: list[tuple[str, int, int]]  # (at, index, row); at is "ref"|"act"
    per_ref_trace: list[tuple[int, int]] | None = None  # (ref index, target count)

    def max_count(self, row: int) -> int:
        return self.max_unmitigated.get(row, 0)


def run(
    stream: ActivationStream,
    tracker: Tracker,
    config: SimConfig,
    target_row: int | None = None,
    trace_target: bool = False,
) -> SimReport:
    """Replay the stream; mitigate at each REF; report per-row maxima.

    A row returned by the tracker has its oracle count reset to zero.
    Window boundaries (every refs_per_window REFs) model the JEDEC
    guarantee that every row is auto-refreshed once per tREFW: all oracle
    counts rebase, and the tracker is reset when table_reset=per_window.
    """
    if stream.timing != config.timing:
        raise ValueError("stream timing does not match the simulation timing")
    stream.validate()

    counts: dict[int, int] = {}
    maxima: dict[int, int] = {}
    flips: set[int] = set()
    log: list[tuple[str, int, int]] = []
    trace: list[tuple[int, int]] = []
    refs_per_window = config.timing.refs_per_window
    total_mit = 0
    on_target = 0
    ref_idx = 0

    rows = stream.rows
    boundaries = stream.ref_after
    b = 0
    n_events = len(rows)

    def apply(row: int, at: str, index: int) -> None:
        nonlocal total_mit, on_target
        counts[row] = 0
        log.append((at, index, row))
        total_mit += 1
        if target_row is not None and row == target_row:
            on_target += 1

    for i in range(n_events + 1):
        while b < len(boundaries) and boundaries[b] == i:
            mitigated = tracker.on_ref(config.mitigations_per_ref)
            if len(mitigated) > config.mitigations_per_ref:
                raise RuntimeError(f"{tracker.name} overran its REF slot budget")
            for row in mitigated:
                apply(row, "ref", ref_idx)
            ref_idx += 1
            if trace_target and target_row is not None:
                trace.append((ref_idx, counts.get(target_row, 0)))
            if refs_per_window and ref_idx % refs_per_window == 0:
                counts.clear()
                if config.table_reset == "per_window":
                    tracker.reset()
            b += 1
        if i == n_events:
            break
        row = int(rows[i])
        c = counts.get(row, 0) + 1
        counts[row] = c
        if c > maxima.get(row, 0):
            maxima[row] = c
        if c >= config.rh_th:
            flips.add(row)
        immediate = tracker.on_activation(row)
        if immediate:
            for r in immediate:
                apply(r, "act", i)

    return SimReport(
        max_unmitigated=maxima,
        bitflip_rows=sorted(flips),
        total_mitigations=total_mit,
        mitigations_on_target=on_target if target_row is not None else 0,
        refs=ref_idx,
        mitigation_log=log,
        per_ref_trace=trace if trace_target else None,
    )


def replay_bitflips(stream: ActivationStream, log, rh_th: int) -> list[int]:
    """Recompute bitflip rows from only the stream and a mitigation log.

    Independent of the tracker: used to cross-check that run()'s oracle
    bookkeeping is sound.
    """
    by_ref: dict[int, list[int]] = {}
    by_act: dict[int, list[int]] = {}
    for at, index, row in log:
        (by_ref if at == "ref" else by_act).setdefault(index, []).append(row)

    counts: dict[int, int] = {}
    flips: set[int] = set()
    refs_per_window = stream.timing.refs_per_window
    boundaries = stream.ref_after
    b = 0
    ref_idx = 0
    for i in range(len(stream) + 1):
        while b < len(boundaries) and boundaries[b] == i:
            for row in by_ref.get(ref_idx, ()):
                counts[row] = 0
            ref_idx += 1
            if refs_per_window and ref_idx % refs_per_window == 0:
                counts.clear()
            b += 1
        if i == len(stream):
            break
        row = int(stream.rows[i])
        counts[row] = counts.get(row, 0) + 1
        if counts[row] >= rh_th:
            flips.add(row)
        for r in by_act.get(i, ()):
            counts[r] = 0
    return sorted(flips)


# -- Monte Carlo ------------------------------------------------------------


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by (master seed, trial index, ...);
    reproducible and independent of evaluation order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, *key])))


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class SuccessEstimate:
    rate: float
    ci_low: float
    ci_high: float
    successes: int
    trials: int

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> "SuccessEstimate":
        low, high = wilson_interval(successes, trials)
        return cls(successes / trials, low, high, successes, trials)


def sampler_failure_mc(
    sampler: str,
    a: int,
    n: int,
    k: int,
    rh_th: int,
    trials: int,
    seed: int = 0,
    max_slots: int = 73,
    p: float = 1.0,
    placement: str = "head",
    chunk: int = 4096,
) -> SuccessEstimate:
    """Vectorized Monte Carlo of the per-tREFI sampling defenses.

    Simulates the samplers' own randomness (per-ACT tags for the
    reservoir, pre-drawn indices for MINT, per-ACT coins for PARA) rather
    than the closed form; equivalence with the event-driven trackers is
    pinned by tests.  Success means the target survives
    ceil(rh_th/a) tREFIs without any of its ACTs being sampled.
    """
    if sampler not in ("reservoir", "mint", "para"):
        raise ValueError(f"unknown sampler {sampler!r}")
    if not 1 <= a <= n <= max_slots:
        raise ValueError("need 1 <= a <= n <= max_slots")
    trefis = -(-rh_th // a)
    if placement == "head":
        t_lo, t_hi = 1, a
    else:
        t_lo, t_hi = n - a + 1, n
    successes = 0
    done = 0
    t = 0
    while done < trials:
        m = min(chunk, trials - done)
        rng = trial_rng(seed, t)
        t += 1
        if sampler == "reservoir":
            tags = rng.random((m, trefis, n))
            tmask = np.zeros(n, dtype=bool)
            tmask[t_lo - 1 : t_hi] = True
            target_min = tags[:, :, tmask].min(axis=2)
            decoy = tags[:, :, ~tmask]
            if decoy.shape[2] < k:
                escape = np.zeros((m, trefis), dtype=bool)
            else:
                kth_decoy = np.partition(decoy, k - 1, axis=2)[:, :, k - 1]
                escape = kth_decoy < target_min
        elif sampler == "mint":
            idx = rng.integers(1, max_slots + 1, size=(m, trefis, k))
            hit = (idx >= t_lo) & (idx <= t_hi)
            escape = ~hit.any(axis=2)
        else:  # para
            coins = rng.random((m, trefis, a))
            escape = (coins >= p).all(axis=2)
        successes += int(escape.all(axis=1).sum())
        done += m
    return SuccessEstimate.from_counts(successes, trials)


@dataclass(frozen=True)
class DsacStochasticResult:
    never_inserted: SuccessEstimate
    success: SuccessEstimate
    min_value: int
    pre_flip_misses: int


def dsac_stochastic_mc(
    attack: AttackSpec,
    config: SimConfig,
    trials: int,
    seed: int | None = None,
) -> DsacStochasticResult:
    """Monte Carlo of the stochastic-eviction attack on DSAC technique ii.

    With one decoy per table entry, phase 1 is deterministic (each decoy
    inserts into spare capacity, everything else hits), so it is replayed
    through the real tracker once.  In phase 2 every target ACT while
    untracked is a miss that swaps with probability 1/(Min+1) with Min
    pinned, so the index of the first insertion is exactly geometric;
    each trial draws it directly.  Success = the target's count reaches
    rh_th before any insertion-then-REF can reset it.
    """
    if attack.kind != "dsac_stochastic":
        raise ValueError("attack must be dsac_stochastic")
    if attack.decoys != attack.table_capacity:
        raise ValueError("fast path needs exactly one decoy per table entry")
    seed = config.seed if seed is None else seed
    stream = attack.build()
    tracker = Dsac(attack.table_capacity, technique_i=False, technique_ii=True,
                   rng=trial_rng(seed, 0xD5AC))
    phase2_start = attack.decoys * attack.per_row_budget
    target_budget = attack.target_budget or attack.per_row_budget

    budget = config.mitigations_per_ref
    boundaries = stream.ref_after
    b = 0
    for i in range(phase2_start):
        while b < len(boundaries) and boundaries[b] == i:
            tracker.on_ref(budget)
            b += 1
        tracker.on_activation(int(stream.rows[i]))
    min_value = tracker.table.min_value()
    p_swap = 1.0 / (min_value + 1)

    # Last REF strictly before the target's rh_th-th ACT: an insertion at
    # miss j <= pre_flip_misses is mitigated before the count can flip.
    flip_event = phase2_start + min(config.rh_th, target_budget)
    pre = boundaries[(boundaries >= phase2_start) & (boundaries <= flip_event - 1)]
    pre_flip_misses = int(pre.max() - phase2_start) if pre.size else 0

    rng = trial_rng(seed, 1)
    first_swap = rng.geometric(p_swap, size=trials)
    never = int((first_swap > target_budget).sum())
    if config.rh_th > target_budget:
        succ = 0  # the target never receives enough ACTs
    else:
        succ = int((first_swap > pre_flip_misses).sum())
    return DsacStochasticResult(
        never_inserted=SuccessEstimate.from_counts(never, trials),
        success=SuccessEstimate.from_counts(succ, trials),
        min_value=min_value,
        pre_flip_misses=pre_flip_misses,
    )


def attack_success_probability(
    attack: AttackSpec,
    tracker_cfg: dict,
    config: SimConfig,
    trials: int,
    target_row: int | None = None,
) -> SuccessEstimate:
    """Monte Carlo fraction of trials where a row reaches rh_th
    un-mitigated, with a Wilson 95% interval.

    For attacks that designate a target row, success means that row
    flips: phase-changing patterns sacrifice their decoys (which absorb
    rh_th activations by design), so counting any flipped row would
    measure the sacrifice, not the evasion.  Untargeted streams count a
    flip on any row.  Dispatches to the vectorized estimators for the
    sampler and DSAC stochastic-eviction experiments; otherwise drives
    the full simulator once per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    kind = tracker_cfg.get("kind", "")
    if attack.kind == "single_target" and kind in ("mint", "reservoir", "para"):
        n = attack.acts_per_trefi or max_acts_per_trefi(config.timing)
        return sampler_failure_mc(
            kind,
            a=attack.target_acts_per_trefi,
            n=n,
            k=int(tracker_cfg.get("k", 1)),
            rh_th=config.rh_th,
            trials=trials,
            seed=config.seed,
            max_slots=int(tracker_cfg.get("max_slots", max_acts_per_trefi(config.timing))),
            p=float(tracker_cfg.get("p", 1.0)),
            placement=attack.placement,
        )
    technique_i = str(tracker_cfg.get("technique_i", "true")).lower() in ("1", "true", "yes", "on")
    if (
        attack.kind == "dsac_stochastic"
        and kind == "dsac"
        and not technique_i
        and attack.decoys == attack.table_capacity
    ):
        return dsac_stochastic_mc(attack, config, trials).success

    if target_row is None and attack.kind != "uniform_random":
        target_row = attack.target_row
    successes = 0
    stream = attack.build(seed=attack.seed)
    for t in range(trials):
        rng = trial_rng(config.seed, t)
        tracker = tracker_from_config(
            dict(tracker_cfg), rng=rng, max_slots=max_acts_per_trefi(config.timing)
        )
        report = run(stream, tracker, config, target_row=target_row)
        if target_row is None:
            successes += bool(report.bitflip_rows)
        else:
            successes += target_row in report.bitflip_rows
    return SuccessEstimate.from_counts(successes, trials)
