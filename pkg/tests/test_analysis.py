import math

import numpy as np
import pytest

from hammerlab.analysis import (
    AREA_UM2_PER_BIT,
    NoCrossoverError,
    UnsupportedCombination,
    area_estimate,
    bits_per_entry,
    cms_false_positive_bound,
    crossover_threshold,
    dsac_analytics,
    required_entries,
    sampler_failure_analytic,
)

N = 606_933


def test_area_constants_structure():
    for tech in ("logic", "memory"):
        assert AREA_UM2_PER_BIT[("cam", tech)] == 2 * AREA_UM2_PER_BIT[("sram", tech)]
    # memory-process SRAM/CAM sit orders of magnitude above DRAM cells
    assert AREA_UM2_PER_BIT[("sram", "memory")] / AREA_UM2_PER_BIT[("dram", "memory")] > 1000


def test_required_entries_examples():
    assert required_entries("space_saving", 4800) == 506  # ceil(606933/1200)
    assert required_entries("prac", 4800) == 131_072
    assert required_entries("countmin", 4800, cms_shape=(2048, 4)) == 8192
    with pytest.raises(ValueError):
        required_entries("space_saving", 3)
    with pytest.raises(UnsupportedCombination):
        required_entries("quantile_sketch", 4800)


def test_bits_per_entry_examples():
    assert bits_per_entry("space_saving", 4800) == 37  # 17 address + 20 counter
    assert bits_per_entry("countmin", 4800) == 20
    assert bits_per_entry("prac", 4800) == 12  # ceil(log2 2400)
    assert bits_per_entry("prac", 4) == 1


def test_reference_point_areas():
    golden = [
        ("space_saving", "sram", "logic", 492),
        ("space_saving", "cam", "logic", 984),
        ("space_saving", "sram", "memory", 136_670),
        ("space_saving", "cam", "memory", 273_341),
        ("prac", "dram", "memory", 4_985),
    ]
    for alg, storage, tech, expect in golden:
        got = area_estimate(alg, 4800, storage, tech).area_um2
        assert abs(got - expect) / expect <= 0.01, (alg, storage, tech, got)


def test_cost_estimate_totals():
    est = area_estimate("space_saving", 4800, "sram", "logic")
    assert est.total_bits == est.entries * est.bits_per_entry == 506 * 37
    assert est.area_um2 == pytest.approx(est.total_bits * 0.0263)


def test_unsupported_combinations_rejected():
    with pytest.raises(UnsupportedCombination):
        area_estimate("countmin", 4800, "dram", "memory")
    with pytest.raises(UnsupportedCombination):
        area_estimate("space_saving", 4800, "dram", "logic")


def test_counter_table_area_monotone_in_rh_th():
    sweep = [100, 200, 400, 800, 1600, 3200, 6400]
    for alg in ("space_saving", "lossy_counting", "sticky_sampling"):
        areas = [area_estimate(alg, r, "sram", "logic").area_um2 for r in sweep]
        assert all(a >= b for a, b in zip(areas, areas[1:]))
    prac = [area_estimate("prac", r, "dram", "memory").area_um2 for r in sweep]
    assert all(a <= b for a, b in zip(prac, prac[1:]))  # non-increasing as rh_th falls


def test_sticky_and_lossy_cost_more_than_space_saving():
    for alg in ("lossy_counting", "sticky_sampling"):
        assert (
            area_estimate(alg, 4800, "sram", "logic").area_um2
            > area_estimate("space_saving", 4800, "sram", "logic").area_um2
        )


def test_crossover_reference_point():
    got = crossover_threshold("space_saving", "sram", "logic", "prac", "dram", "memory")
    assert abs(got - 628) / 628 <= 0.02


def test_crossover_identical_algorithm_returns_range_top():
    got = crossover_threshold("space_saving", "sram", "logic",
                              "space_saving", "sram", "logic", lo=100, hi=500)
    assert got == 500


def test_crossover_above_range_signalled():
    # a memory-process counter table never undercuts DRAM-cell counting
    # in the scanned range; the crossover lies above it
    with pytest.raises(NoCrossoverError):
        crossover_threshold("space_saving", "sram", "memory",
                            "prac", "dram", "memory", lo=100, hi=4800)


def test_cms_false_positive_bound_examples():
    assert cms_false_positive_bound(2048, 4, N) == (592, 0.0625)
    assert cms_false_positive_bound(N, 1, N) == (2, 0.5)
    assert cms_false_positive_bound(1024, 2, N) == (1185, 0.25)
    with pytest.raises(ValueError):
        cms_false_positive_bound(1, 1, N)


def test_cms_bound_halves_when_width_doubles():
    for width in (128, 512, 2048):
        b1, _ = cms_false_positive_bound(width, 4, N)
        b2, _ = cms_false_positive_bound(2 * width, 4, N)
        assert abs(b1 - 2 * b2) <= 1  # integer floor aside


def test_sampler_failure_analytic_examples():
    assert sampler_failure_analytic("reservoir", 36, 36) == 0.0
    assert sampler_failure_analytic("mint", 1, 73, 1, 64) == pytest.approx(
        (72 / 73) ** 64
    )
    assert sampler_failure_analytic("mint", 1, 73, 1, 64) == pytest.approx(0.414, abs=5e-4)
    assert sampler_failure_analytic("para", 1, 73, rh_th=64, p=0.5) == pytest.approx(0.5**64)


def test_reservoir_never_worse_than_mint():
    for a in (1, 2, 4):
        for n in range(a, 74):
            for k in (1, 2):
                res = sampler_failure_analytic("reservoir", a, n, k, 64)
                mint = sampler_failure_analytic("mint", a, n, k, 64)
                assert res <= mint + 1e-12
                if n == 73:
                    assert res == pytest.approx(mint)
                else:
                    assert res < mint


def test_dsac_analytics_examples():
    never, minute = dsac_analytics(33_000, 33_000, windows=1875)
    assert never == pytest.approx(0.3679, abs=5e-4)  # 0.38 when rounded coarsely
    assert minute >= 0.999
    assert dsac_analytics(0, 10)[0] == 0.0
    with pytest.raises(ValueError):
        dsac_analytics(-1, 10)
