import math

import numpy as np
import pytest

from conftest import exact_counts, random_stream
from hammerlab.trackers import StickySampling


def test_parameter_arithmetic():
    # t = ceil(100 * ln 500) = 622, first window 2t = 1244
    s = StickySampling(0.01, 0.1)
    assert s.t == 622
    assert s.window_width == 1244
    assert s.p_sample == 1.0


def test_initial_rate_inserts_every_first_occurrence(rng):
    s = StickySampling(0.25, 0.0008, rng=rng)
    for row in range(20):
        s.on_activation(row)
    assert all(s.estimate(r) == 1 for r in range(20))


def test_window_doubles_and_rate_halves():
    rng = np.random.default_rng(7)
    s = StickySampling(0.25, 0.0008, rng=rng)  # t=32, first boundary at 64
    assert s.window_width == 64
    for i in range(64):
        s.on_activation(i % 4)
    assert s.window_width == 128
    assert s.p_sample == 0.5


def test_estimate_never_exceeds_true_count(rng):
    for trial in range(30):
        s = StickySampling(0.05, 0.05, rng=rng)
        stream = random_stream(rng, 2500, 40)
        for x in stream:
            s.on_activation(int(x))
        real = exact_counts(stream)
        for row, est in s.entries.items():
            assert est <= real[row]


def test_heavy_row_presence_probability(rng):
    # rows with f_real >= eps*N survive with probability >= 1 - delta
    eps, delta, n = 0.05, 0.1, 2000
    hits = 0
    trials = 300
    for _ in range(trials):
        s = StickySampling(eps, delta, rng=rng)
        stream = random_stream(rng, n, 30, skew="zipf")
        for x in stream:
            s.on_activation(int(x))
        real = exact_counts(stream)
        heavy = [r for r, f in real.items() if f >= eps * n]
        assert heavy
        hits += all(s.estimate(r) is not None for r in heavy)
    assert hits / trials >= 1 - delta


def geometric_insertion_table(stream, p, rng):
    """Direct sampling at a fixed rate: the reference process for
    compress-equivalence."""
    table = {}
    for x in stream:
        if x in table:
            table[x] += 1
        elif rng.random() < p:
            table[x] = 1
    return table


def test_compress_equivalence_total_variation(rng):
    # after the first Compress the table is distributed as if sampling had
    # run at the halved rate from the start
    stream = [1] * 48 + [2] * 16
    trials = 30_000
    states_a, states_b = {}, {}
    for _ in range(trials):
        s = StickySampling(0.25, 0.0008, rng=rng)  # boundary exactly at 64
        for x in stream:
            s.on_activation(x)
        key = (s.entries.get(1, 0), s.entries.get(2, 0))
        states_a[key] = states_a.get(key, 0) + 1
        direct = geometric_insertion_table(stream, 0.5, rng)
        key = (direct.get(1, 0), direct.get(2, 0))
        states_b[key] = states_b.get(key, 0) + 1
    tv = 0.5 * sum(
        abs(states_a.get(k, 0) - states_b.get(k, 0)) / trials
        for k in set(states_a) | set(states_b)
    )
    assert tv <= 0.03


def test_single_row_compress_matches_geometric_analytic(rng):
    # count after one compress of an f-count row is f - G, G ~ geometric(1/2);
    # compare against the closed form for a few outcomes
    f, trials = 24, 40_000
    outcomes = {}
    for _ in range(trials):
        s = StickySampling(0.25, 0.0008, rng=rng)
        for _ in range(f):
            s.on_activation(9)
        s.compress()
        outcomes[s.entries.get(9, 0)] = outcomes.get(s.entries.get(9, 0), 0) + 1
    for tails in range(4):
        expected = 2.0 ** -(tails + 1)
        got = outcomes.get(f - tails, 0) / trials
        assert abs(got - expected) < 0.01


def test_bound_spec_lower_is_probabilistic():
    s = StickySampling(0.1, 0.2)
    spec = s.bound_spec()
    assert spec.upper_conf == 1.0
    assert spec.lower_conf == pytest.approx(0.8)
