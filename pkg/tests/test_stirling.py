import numpy as np
import pytest

from mminfenv import StirlingTables

# Poisson(1) raw moments: Bell numbers
BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


def test_known_rows():
    tables = StirlingTables(4)
    assert tables.second_kind[4] == [0, 1, 7, 6, 1]
    assert tables.first_kind[4] == [0, -6, 11, -6, 1]
    assert tables.second_kind[0] == [1]
    assert tables.first_kind[0] == [1]


def test_recurrences_hold():
    tables = StirlingTables(12)
    s2, s1 = tables.second_kind, tables.first_kind
    for l in range(1, 13):
        for j in range(1, l):
            assert s2[l][j] == j * s2[l - 1][j] + s2[l - 1][j - 1]
            assert s1[l][j] == s1[l - 1][j - 1] - (l - 1) * s1[l - 1][j]


def test_triangles_are_exact_mutual_inverses_through_20():
    tables = StirlingTables(20)
    composition = tables.compose()
    for l in range(21):
        for m in range(l + 1):
            assert composition[l][m] == (1 if l == m else 0)


def test_poisson_one_raw_moments_are_bell_numbers():
    tables = StirlingTables(8)
    factorial = np.ones(9)  # Poisson(1) factorial moments are all 1
    raw = tables.raw_from_factorial(factorial)
    assert raw == pytest.approx(BELL, rel=1e-12)


def test_round_trip_raw_factorial():
    # genuine mixed-Poisson factorial-moment sequences (moments of the
    # mixing law); arbitrary per-order values would not be a moment
    # sequence and would cancel catastrophically under inversion
    tables = StirlingTables(10)
    rng = np.random.default_rng(5)
    orders = np.arange(11)
    # growing sequences, as produced by the queueing models; sequences
    # that decay toward zero lose relative precision to the alternating
    # first-kind sums, which is inherent to the inversion
    for _ in range(10):
        weight = rng.uniform(0.1, 0.9)
        a = rng.uniform(0.3, 1.0)
        b = rng.uniform(1.7, 4.0)
        factorial = weight * a ** orders + (1.0 - weight) * b ** orders
        raw = tables.raw_from_factorial(factorial)
        back = tables.factorial_from_raw(raw)
        assert back == pytest.approx(factorial, rel=1e-10)


def test_order_overflow_rejected():
    tables = StirlingTables(3)
    with pytest.raises(ValueError):
        tables.raw_from_factorial(np.ones(6))
    with pytest.raises(ValueError):
        StirlingTables(-1)
