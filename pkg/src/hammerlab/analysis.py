"""Per-bank hardware cost model and closed-form failure probabilities.

The cost model composes three calibrated rules:

* entry counts from each algorithm's space complexity at the error
  budget epsilon*N = RH_TH/4 (RH_TH/2 for reset-free exact counting),
* per-entry bit widths (row-address bits plus a ceil(log2 N) counter for
  counter tables; counter-only for sketches; ceil(log2(RH_TH/2)) for
  exact per-row counting),
* um^2-per-bit constants per (storage, technology) pair.

With the default geometry (131,072 rows/bank, so 17 address bits) and
stream length N = 606,933 this reproduces the reference operating point
at RH_TH = 4,800: 492 / 984 um^2 for a logic-process SRAM/CAM counter
table, 136,670 / 273,341 um^2 for the same table in a memory process,
4,985 um^2 for DRAM-cell per-row counters, and a 628-ish RH_TH where the
logic-process counter table stops beating per-row counting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import DEFAULT_GEOMETRY, DEFAULT_TIMING, BankGeometry, TimingParams, max_stream_len

# um^2 per bit, by (storage, technology).  CAM cells cost twice SRAM;
# memory-process SRAM/CAM carry a conservative 10x scaling over a
# logic-process-derived base.
AREA_UM2_PER_BIT: dict[tuple[str, str], float] = {
    ("sram", "logic"): 0.0263,
    ("sram", "memory"): 7.3,
    ("cam", "logic"): 0.0526,
    ("cam", "memory"): 14.6,
    ("dram", "memory"): 0.00317,
}

COUNTER_TABLE_ALGORITHMS = ("space_saving", "misra_gries", "lossy_counting", "sticky_sampling")
SKETCH_ALGORITHMS = ("countmin", "count_sketch", "wavelet")
EXACT_ALGORITHMS = ("exact", "prac")
ALGORITHMS = COUNTER_TABLE_ALGORITHMS + SKETCH_ALGORITHMS + EXACT_ALGORITHMS

# Sketch-family algorithms the default sweeps exclude: their 1/eps^2
# space complexities explode as RH_TH falls.
EXCLUDED_FROM_SWEEPS = ("count_sketch", "wavelet")


@dataclass(frozen=True)
class CostEstimate:
    algorithm: str
    storage: str
    technology: str
    rh_th: int
    entries: int
    bits_per_entry: int
    area_um2: float

    @property
    def total_bits(self) -> int:
        return self.entries * self.bits_per_entry


class UnsupportedCombination(ValueError):
    pass


def _threshold(algorithm: str, rh_th: int) -> float:
    """The epsilon*N budget: RH_TH/4, or RH_TH/2 for reset-free exact
    counting (no table reset, no double-sided halving already applied)."""
    return rh_th / 2 if algorithm in EXACT_ALGORITHMS else rh_th / 4


def required_entries(
    algorithm: str,
    rh_th: int,
    n: int | None = None,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    cms_shape: tuple[int, int] | None = None,
    delta: float = 0.1,
    timing: TimingParams = DEFAULT_TIMING,
) -> int:
    """Entry (or counter) count an algorithm needs at its error budget."""
    if algorithm not in ALGORITHMS:
        raise UnsupportedCombination(f"unknown algorithm {algorithm!r}")
    if algorithm in EXACT_ALGORITHMS:
        return geometry.rows_per_bank
    if algorithm == "countmin":
        if cms_shape is None:
            raise ValueError("countmin needs cms_shape=(width, depth)")
        width, depth = cms_shape
        return width * depth
    if rh_th < 4:
        raise ValueError("rh_th must be >= 4 so the threshold is at least 1")
    n = max_stream_len(timing) if n is None else n
    t = _threshold(algorithm, rh_th)
    if t < 1:
        raise ValueError("threshold below one activation")
    inv_eps = n / t  # 1/epsilon with epsilon*N = T
    if algorithm in ("space_saving", "misra_gries"):
        return math.ceil(inv_eps)
    if algorithm == "lossy_counting":
        return math.ceil(inv_eps * math.log(t))
    if algorithm == "sticky_sampling":
        eps = t / n
        return math.ceil(2.0 * inv_eps * math.log(1.0 / (2.0 * eps * delta)))
    # 1/eps^2 family, computable but excluded from default sweeps
    return math.ceil(inv_eps * inv_eps * math.log(1.0 / delta))


def bits_per_entry(
    algorithm: str,
    rh_th: int,
    n: int | None = None,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    timing: TimingParams = DEFAULT_TIMING,
) -> int:
    """Entry width: address+counter for tables, counter-only for sketches
    and for exact counting (whose counter tops out at RH_TH/2)."""
    if algorithm in EXACT_ALGORITHMS:
        return max(1, math.ceil(math.log2(rh_th / 2)))
    n = max_stream_len(timing) if n is None else n
    counter = math.ceil(math.log2(n))
    if algorithm in SKETCH_ALGORITHMS:
        return counter
    return geometry.address_bits + counter


def area_estimate(
    algorithm: str,
    rh_th: int,
    storage: str,
    technology: str,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    timing: TimingParams = DEFAULT_TIMING,
    cms_shape: tuple[int, int] | None = None,
    delta: float = 0.1,
) -> CostEstimate:
    """Compose entries x bits x the um^2/bit constant into a CostEstimate."""
    key = (storage, technology)
    if key not in AREA_UM2_PER_BIT:
        raise UnsupportedCombination(f"no area constant for storage={storage}, technology={technology}")
    if storage == "dram" and algorithm not in EXACT_ALGORITHMS:
        raise UnsupportedCombination("DRAM-cell storage is modeled for per-row counting only")
    entries = required_entries(algorithm, rh_th, None, geometry, cms_shape, delta, timing)
    bits = bits_per_entry(algorithm, rh_th, None, geometry, timing)
    return CostEstimate(
        algorithm=algorithm,
        storage=storage,
        technology=technology,
        rh_th=rh_th,
        entries=entries,
        bits_per_entry=bits,
        area_um2=entries * bits * AREA_UM2_PER_BIT[key],
    )


class NoCrossoverError(ValueError):
    pass


def crossover_threshold(
    alg_a: str,
    storage_a: str,
    technology_a: str,
    alg_b: str,
    storage_b: str,
    technology_b: str,
    lo: int = 16,
    hi: int = 10_000,
    geometry: BankGeometry = DEFAULT_GEOMETRY,
    timing: TimingParams = DEFAULT_TIMING,
    cms_shape: tuple[int, int] | None = None,
) -> int:
    """Smallest RH_TH at which alg_a's area still stays at or below
    alg_b's, scanning down from ``hi``.

    Counter-table areas grow as RH_TH falls while per-row counting
    shrinks, so the scan crosses at most once.  If alg_a is already above
    alg_b at ``hi`` the crossover lies outside (above) the scanned range
    and NoCrossoverError is raised; if alg_a never exceeds alg_b the scan
    reports ``hi`` (the areas never cross inside the range).
    """
    def area(alg, stor, tech, r):
        return area_estimate(alg, r, stor, tech, geometry, timing, cms_shape).area_um2

    last_pass = None
    for r in range(hi, lo - 1, -1):
        if area(alg_a, storage_a, technology_a, r) <= area(alg_b, storage_b, technology_b, r):
            last_pass = r
        else:
            if last_pass is None:
                raise NoCrossoverError(
                    f"{alg_a} already costs more than {alg_b} at rh_th={hi}; "
                    "any crossover lies above the scanned range"
                )
            return last_pass
    # never crossed inside the range (e.g. an algorithm against itself)
    return hi


def cms_false_positive_bound(width: int, depth: int, n: int) -> tuple[int, float]:
    """False-positive bound floor((2/width)*N) and its confidence 2^-depth."""
    if width < 2 or depth < 1:
        raise ValueError("need width >= 2 and depth >= 1")
    return math.floor(2.0 * n / width), 2.0 ** -depth


def sampler_failure_analytic(
    sampler: str,
    a: int,
    n: int,
    k: int = 1,
    rh_th: int = 64,
    max_slots: int = 73,
    p: float = 1.0,
) -> float:
    """Closed-form attack success against the per-tREFI samplers.

    The target fires ``a`` of the ``n`` ACTs per tREFI and needs
    ceil(rh_th/a) clean tREFIs.  Per tREFI the escape probability is
    (1 - a/max_slots)^k for pre-drawn indices (a drawn index lands on the
    target with probability a/max_slots regardless of n), (1 - a/n)^k for
    the reservoir, and (1-p)^a for per-ACT Bernoulli sampling.
    """
    if not 1 <= a <= n <= max_slots:
        raise ValueError("need 1 <= a <= n <= max_slots")
    if k < 1:
        raise ValueError("k must be >= 1")
    if sampler == "mint":
        escape = (1.0 - a / max_slots) ** k
    elif sampler == "reservoir":
        escape = (1.0 - a / n) ** k
    elif sampler == "para":
        escape = (1.0 - p) ** a
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    return escape ** math.ceil(rh_th / a)


def dsac_analytics(min_value: int, misses: int, windows: int = 1) -> tuple[float, float]:
    """(never-inserted probability over one window, success over repeated
    windows) for the stochastic-eviction attack with Min pinned."""
    if min_value < 0 or misses < 0 or windows < 1:
        raise ValueError("min_value, misses >= 0 and windows >= 1")
    never = (min_value / (min_value + 1.0)) ** misses
    return never, 1.0 - (1.0 - never) ** windows
