import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from perfolab.combinatorics import (
    PowerOfTwo, SetPartition, bell, central_size_pmf, central_weight, exact_central_pmf, log_bell,
    log_star, sample_central_size, sample_set_partition, sample_set_partition_labels, solve_r,
    stirling2_row, tower,
)


def restricted_growth_strings(m):
    """Every set partition of {0..m-1} as canonical labels."""
    if m == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from rec(prefix + [b], max(top, b))

    yield from rec([0], 0)


def test_tower_examples():
    assert tower(0) == 1
    assert tower(3) == 16
    assert tower(4) == 65536
    assert tower(5) == 2 ** 65536
    assert tower(6) == PowerOfTwo(2 ** 65536)
    with pytest.raises(OverflowError):
        tower(7)


def test_log_star_examples():
    assert log_star(1) == 0
    assert log_star(5) == 3
    assert log_star(65536) == 4


def test_tower_log_star_adjunction():
    for k in range(7):
        assert log_star(tower(k)) == k
    for k in range(1, 6):
        assert log_star(tower(k) + 1) == k + 1


def test_bell_against_enumeration():
    for m in range(11):
        assert bell(m) == sum(1 for _ in restricted_growth_strings(m))
    assert bell(0) == 1 and bell(3) == 5 and bell(10) == 115975


def test_log_bell():
    for m in range(0, 301):
        assert math.isclose(math.exp(log_bell(m) - math.log(bell(m))), 1.0, rel_tol=1e-6)


def test_stirling_row_sums_to_bell():
    for m in range(12):
        assert sum(stirling2_row(m)) == bell(m)


def test_solve_r_examples():
    assert math.isclose(solve_r(math.e), 1.0, rel_tol=1e-12)
    assert math.isclose(solve_r(2 * math.e ** 2), 2.0, rel_tol=1e-12)
    r = solve_r(1000.0)
    lo, hi = 0.0, 10.0  # bisection oracle
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if mid * math.exp(mid) < 1000 else (lo, mid)
    assert math.isclose(r, lo, rel_tol=1e-10)


def test_solve_r_residual_grid():
    for s in np.logspace(-3, 9, 400):
        r = solve_r(float(s))
        assert abs(r * math.exp(r) - s) <= 1e-9 * max(1.0, s)
    with pytest.raises(ValueError):
        solve_r(0.0)


def test_set_partition_small_cases():
    rng = np.random.default_rng(0)
    assert sample_set_partition(0, rng).labels == ()
    assert sample_set_partition(1, rng).labels == (0,)
    p = SetPartition.from_labels([3, 3, 1, 3])
    assert p.labels == (0, 0, 1, 0) and p.block_count == 2


@pytest.mark.parametrize("m", [4, 5])
def test_set_partition_uniform(m):
    rng = np.random.default_rng(100 + m)
    universe = list(restricted_growth_strings(m))
    counts = Counter(tuple(sample_set_partition_labels(m, rng).tolist()) for _ in range(100_000))
    assert set(counts) <= set(universe)
    observed = [counts[p] for p in universe]
    assert stats.chisquare(observed).pvalue > 1e-3


def test_block_count_law():
    rng = np.random.default_rng(11)
    for m in range(2, 9):  # m = 1 has a single outcome
        row = stirling2_row(m)
        blocks = [int(sample_set_partition_labels(m, rng).max()) + 1 for _ in range(100_000)]
        observed = np.bincount(blocks, minlength=m + 1)[1:]
        expected = np.array(row[1:], dtype=float) / bell(m) * len(blocks)
        keep = expected >= 5  # pool sparse cells into their neighbour
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        if exp[-1] == 0:
            obs, exp = obs[:-1], exp[:-1]
        assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_central_pmf_examples():
    assert central_weight(2, 1) == 4 and central_weight(2, 2) == 1
    assert exact_central_pmf(2) == [Fraction(4, 5), Fraction(1, 5)]
    assert np.allclose(central_size_pmf(2), [0.8, 0.2])
    assert list(central_size_pmf(1)) == [1.0]


def test_central_pmf_float_path_agrees_with_exact():
    from perfolab.combinatorics import _central_pmf

    n = 64
    exact = np.array([float(f) for f in exact_central_pmf(n)])
    assert np.allclose(_central_pmf(n), exact, atol=1e-15)
    big = central_size_pmf(3000)
    assert math.isclose(big.sum(), 1.0, rel_tol=1e-12)
    assert abs(int(np.argmax(big)) + 1 - 1500) < 30


def test_central_size_sampling_n12():
    rng = np.random.default_rng(12)
    exact = np.array([float(f) for f in exact_central_pmf(12)])
    draws = np.array([sample_central_size(12, rng) for _ in range(100_000)])
    observed = np.bincount(draws - 1, minlength=12)
    expected = exact * len(draws)
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    assert stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 1e-3
