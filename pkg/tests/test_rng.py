import numpy as np
import pytest

from arcbatch import rng

# Frozen outputs pin the construction; regenerating them is a breaking
# change for every recorded trajectory.
SEED0_WORDS = [
    0x9ED57CD981945264, 0xFC55338A89426223, 0x399BA32D5C8835B9, 0x37270393396F957B,
]
SEED42_WORDS = [
    0xD924AB9A3BE35458, 0xB9DF52D05F07D657, 0x6040F59AF577A190, 0x354AED2853DCFE4B,
]


@pytest.mark.parametrize("seed,expected", [(0, SEED0_WORDS), (42, SEED42_WORDS)])
def test_frozen_vectors(seed, expected):
    s = rng.from_seed(seed)
    for want in expected:
        word, s = rng.next_u64(s)
        assert word == want


def test_draws_deterministic():
    a = rng.from_seed(123)
    b = rng.from_seed(123)
    for _ in range(100):
        wa, a = rng.next_u64(a)
        wb, b = rng.next_u64(b)
        assert wa == wb


def test_split_deterministic_and_distinct():
    s = rng.from_seed(7)
    first = rng.split(s, 2)
    second = rng.split(s, 2)
    assert first == second
    assert first[0] != first[1]
    assert all(c.key != s.key for c in first)


def test_split_vec_matches_scalar():
    keys, counters = rng.keys_from_seed(11, 50)
    root = rng.from_seed(11)
    assert [int(k) for k in keys] == [c.key for c in rng.split(root, 50)]
    child_keys, child_counters = rng.split_vec(keys, counters)
    for i in range(50):
        scalar_child = rng.split(rng.PrngState(int(keys[i]), int(counters[i])), 1)[0]
        assert scalar_child.key == int(child_keys[i])
        assert int(child_counters[i]) == 0


def test_vector_draws_match_scalar():
    keys, counters = rng.keys_from_seed(3, 64)
    for _ in range(3):
        words, counters = rng.next_u64_vec(keys, counters)
        for i in range(64):
            state = rng.PrngState(int(keys[i]), int(counters[i]) - 1)
            word, _ = rng.next_u64(state)
            assert word == int(words[i])


def test_uniform_index_scalar_vector_agree():
    keys, counters = rng.keys_from_seed(5, 1000)
    words, _ = rng.next_u64_vec(keys, counters)
    vec = rng.uniform_index_vec(words, 149)
    for i in range(1000):
        assert rng.uniform_index(int(words[i]), 149) == int(vec[i])
    assert vec.min() >= 0 and vec.max() < 149


def test_uniform_index_bounds():
    assert rng.uniform_index(0, 10) == 0
    assert rng.uniform_index(rng.MASK64, 10) == 9
    with pytest.raises(ValueError):
        rng.uniform_index(1, 0)


def test_sibling_streams_serial_correlation():
    # 10^6 draws across sibling streams; adjacent-lane correlation
    # should be statistical noise.
    n = 1000
    keys, counters = rng.keys_from_seed(17, n)
    draws = []
    for _ in range(1000):
        words, counters = rng.next_u64_vec(keys, counters)
        draws.append(words)
    x = np.concatenate(draws).astype(np.float64) / float(2**64)
    a, b = x[:-1], x[1:]
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 0.01


def test_uniformity_chi_square():
    # Multiply-shift reduction over 7 buckets: frequencies within 3
    # sigma of uniform.
    n = 100_000
    keys, counters = rng.keys_from_seed(23, n)
    words, _ = rng.next_u64_vec(keys, counters)
    idx = rng.uniform_index_vec(words, 7).astype(np.int64)
    counts = np.bincount(idx, minlength=7)
    expected = n / 7
    sigma = np.sqrt(n * (1 / 7) * (6 / 7))
    assert np.all(np.abs(counts - expected) < 3 * sigma)


def test_mulhi64_matches_python_ints():
    gen = np.random.default_rng(0)
    a = gen.integers(0, 2**64, size=500, dtype=np.uint64)
    b = gen.integers(0, 2**64, size=500, dtype=np.uint64)
    hi = rng._mulhi64(a, b)
    for i in range(500):
        assert int(hi[i]) == (int(a[i]) * int(b[i])) >> 64
