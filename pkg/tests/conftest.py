import numpy as np
import pytest
from collections import Counter


@pytest.fixture
def rng():
    return np.random.default_rng(0xBEEF)


def exact_counts(rows) -> Counter:
    """Brute-force frequency oracle."""
    return Counter(int(r) for r in rows)


def random_stream(rng, length, alphabet, skew="mixed"):
    """Row sequence with enough skew to make heavy-hitter tables interesting."""
    if skew == "uniform":
        return rng.integers(0, alphabet, size=length, dtype=np.int64)
    ranks = np.arange(1, alphabet + 1, dtype=np.float64)
    weights = 1.0 / ranks
    weights /= weights.sum()
    zipf = rng.choice(alphabet, size=length, p=weights)
    if skew == "zipf":
        return zipf.astype(np.int64)
    uniform = rng.integers(0, alphabet, size=length, dtype=np.int64)
    pick = rng.random(length) < 0.5
    return np.where(pick, zipf, uniform).astype(np.int64)
