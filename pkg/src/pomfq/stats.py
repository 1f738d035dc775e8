"""Exact and asymptotic significance tests used by the harness."""

import math
from math import comb

import numpy as np
from scipy.special import stdtr


def fisher_exact(w1: int, l1: int, w2: int, l2: int) -> float:
    """Two-sided Fisher exact p for the 2x2 table [[w1, l1], [w2, l2]].

    Sums the hypergeometric probabilities of every table with the same
    margins whose probability does not exceed the observed table's. All
    arithmetic is exact integer work, so ties are handled exactly.
    """
    for v in (w1, l1, w2, l2):
        if v < 0 or v != int(v):
            raise ValueError("counts must be nonnegative integers")
    w1, l1, w2, l2 = int(w1), int(l1), int(w2), int(l2)
    n = w1 + l1 + w2 + l2
    row1 = w1 + l1
    col1 = w1 + w2
    if row1 == 0 or row1 == n or col1 == 0 or col1 == n:
        return 1.0
    lo = max(0, col1 - (n - row1))
    hi = min(row1, col1)
    weight_observed = comb(row1, w1) * comb(n - row1, col1 - w1)
    total = 0
    for k in range(lo, hi + 1):
        weight = comb(row1, k) * comb(n - row1, col1 - k)
        if weight <= weight_observed:
            total += weight
    return total / comb(n, col1)


def welch_t_test(sample1, sample2) -> tuple[float, float]:
    """Welch statistic and two-sided p with Welch-Satterthwaite df."""
    a = np.asarray(sample1, dtype=float)
    b = np.asarray(sample2, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    m1, m2 = a.mean(), b.mean()
    v1 = a.var(ddof=1)
    v2 = b.var(ddof=1)
    se2 = v1 / a.size + v2 / b.size
    if se2 == 0.0:
        if m1 == m2:
            return 0.0, 1.0
        return math.copysign(math.inf, m1 - m2), 0.0
    t = (m1 - m2) / math.sqrt(se2)
    df = se2 ** 2 / ((v1 / a.size) ** 2 / (a.size - 1)
                     + (v2 / b.size) ** 2 / (b.size - 1))
    p = 2.0 * float(stdtr(df, -abs(t)))
    return float(t), min(p, 1.0)
