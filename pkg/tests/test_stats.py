import math
from fractions import Fraction
from math import comb

import pytest
import scipy.stats

from pomfq.stats import fisher_exact, welch_t_test
from pomfq.rng import make_rng


def fisher_by_enumeration(w1, l1, w2, l2):
    """Independent oracle: exact-fraction enumeration over all same-margin tables."""
    n = w1 + l1 + w2 + l2
    r1 = w1 + l1
    c1 = w1 + w2
    if r1 == 0 or r1 == n or c1 == 0 or c1 == n:
        return 1.0
    denom = comb(n, c1)
    observed = Fraction(comb(r1, w1) * comb(n - r1, c1 - w1), denom)
    total = Fraction(0)
    for k in range(max(0, c1 - (n - r1)), min(r1, c1) + 1):
        p = Fraction(comb(r1, k) * comb(n - r1, c1 - k), denom)
        if p <= observed:
            total += p
    return float(total)


def test_fisher_extreme_table():
    # 2 / C(20, 10): only the two extreme tables are as improbable
    expected = 2 / comb(20, 10)
    assert fisher_exact(10, 0, 0, 10) == pytest.approx(expected)
    assert fisher_exact(10, 0, 0, 10) == pytest.approx(1.082e-5, rel=1e-3)


def test_fisher_identical_proportions():
    assert fisher_exact(5, 5, 5, 5) == 1.0


def test_fisher_symmetry_under_row_and_column_swap():
    assert fisher_exact(7, 3, 2, 8) == fisher_exact(8, 2, 3, 7)


def test_fisher_degenerate_margins():
    assert fisher_exact(0, 0, 3, 5) == 1.0
    assert fisher_exact(4, 0, 6, 0) == 1.0
    assert fisher_exact(0, 0, 0, 0) == 1.0


def test_fisher_rejects_bad_counts():
    with pytest.raises(ValueError):
        fisher_exact(-1, 2, 3, 4)


def test_fisher_matches_enumeration_sampled():
    rng = make_rng(1, "fisher")
    for _ in range(300):
        w1, l1, w2, l2 = (int(x) for x in rng.integers(0, 12, size=4))
        assert fisher_exact(w1, l1, w2, l2) == pytest.approx(
            fisher_by_enumeration(w1, l1, w2, l2), abs=1e-12)


def test_fisher_matches_scipy():
    rng = make_rng(2, "fisher-scipy")
    for _ in range(200):
        w1, l1, w2, l2 = (int(x) for x in rng.integers(0, 15, size=4))
        ours = fisher_exact(w1, l1, w2, l2)
        _, ref = scipy.stats.fisher_exact([[w1, l1], [w2, l2]])
        assert ours == pytest.approx(ref, abs=1e-9)


def test_welch_identical_samples():
    t, p = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert t == 0.0
    assert p == 1.0


def test_welch_highly_separated():
    t, p = welch_t_test([0.0] * 5, [10.0, 10.0, 10.0, 10.0, 10.0001])
    assert p < 1e-6


def test_welch_antisymmetric():
    a = [1.0, 2.0, 4.0, 3.0]
    b = [5.0, 7.0, 6.0, 6.5]
    t1, p1 = welch_t_test(a, b)
    t2, p2 = welch_t_test(b, a)
    assert t1 == -t2
    assert p1 == p2


def test_welch_zero_variance_distinct_means():
    t, p = welch_t_test([1.0, 1.0], [2.0, 2.0])
    assert t == -math.inf
    assert p == 0.0


def test_welch_rejects_small_or_nonfinite():
    with pytest.raises(ValueError):
        welch_t_test([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        welch_t_test([1.0, float("nan")], [1.0, 2.0])


def test_welch_matches_scipy_reference():
    rng = make_rng(3, "welch")
    for _ in range(20):
        a = rng.normal(loc=rng.uniform(-2, 2), scale=rng.uniform(0.5, 3),
                       size=int(rng.integers(2, 30)))
        b = rng.normal(loc=rng.uniform(-2, 2), scale=rng.uniform(0.5, 3),
                       size=int(rng.integers(2, 30)))
        t, p = welch_t_test(a, b)
        ref = scipy.stats.ttest_ind(a, b, equal_var=False)
        assert t == pytest.approx(ref.statistic, abs=1e-9)
        assert p == pytest.approx(ref.pvalue, abs=1e-9)
