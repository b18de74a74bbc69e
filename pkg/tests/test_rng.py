import math
from collections import Counter

import pytest

from slicing4meta.rng import Rng, Xoshiro256StarStar, splitmix64


def test_splitmix64_vector():
    assert splitmix64(0, 3) == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_xoshiro_vector():
    g = Xoshiro256StarStar([1, 2, 3, 4])
    assert [g.next_u64() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_zero_state_rejected():
    with pytest.raises(ValueError):
        Xoshiro256StarStar([0, 0, 0, 0])


def test_seeded_streams_repeat():
    assert [Rng(42).randint(1, 56) for _ in range(3)] == [Rng(42).randint(1, 56)] * 3
    a, b = Rng(7), Rng(7)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]
    assert Rng(7).child(1).next_u64() != Rng(7).child(2).next_u64()


def test_random_in_unit_interval():
    r = Rng(3)
    xs = [r.random() for _ in range(10_000)]
    assert all(0 <= x < 1 for x in xs)
    assert abs(sum(xs) / len(xs) - 0.5) < 0.02


def test_randint_degenerate_and_bounds():
    r = Rng(5)
    assert {r.randint(5, 5) for _ in range(50)} == {5}
    with pytest.raises(ValueError):
        r.randint(3, 2)


def test_randint_uniform_within_five_sigma():
    r = Rng(2023)
    n = 100_000
    counts = Counter(r.randint(1, 56) for _ in range(n))
    p = 1 / 56
    sigma = math.sqrt(n * p * (1 - p))
    assert set(counts) == set(range(1, 57))
    for v in range(1, 57):
        assert abs(counts[v] - n * p) <= 5 * sigma


def test_exponential_mean():
    r = Rng(11)
    xs = [r.exponential(100.0) for _ in range(20_000)]
    assert abs(sum(xs) / len(xs) - 100.0) < 3.0
