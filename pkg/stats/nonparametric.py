"""
Mann-Whitney U test and Cliff's delta.

U uses midranks for ties. The p-value is two-sided: exact enumeration of
every rank arrangement for small samples, otherwise the normal approximation
with tie-corrected variance and continuity correction.
"""
from itertools import combinations

import numpy as np
from django.conf import settings
from scipy.stats import norm, rankdata

from .exceptions import StatisticsError

NEGLIGIBLE = 'negligible'
SMALL = 'small'
MEDIUM = 'medium'
LARGE = 'large'

# (upper bound of |d|, magnitude)
MAGNITUDE_BANDS = ((0.147, NEGLIGIBLE), (0.33, SMALL), (0.474, MEDIUM))


def _check(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        raise StatisticsError("Both samples need at least one value")
    return x, y


def _exact_p(ranks, n, u):
    """Two-sided p from the U distribution over every choice of n positions"""
    offset = n * (n + 1) / 2
    below = above = total = 0
    for chosen in combinations(range(len(ranks)), n):
        value = ranks[list(chosen)].sum() - offset
        total += 1
        # U values are multiples of 0.5, so exact comparison is safe
        if value <= u:
            below += 1
        if value >= u:
            above += 1
    return min(1.0, 2 * min(below, above) / total)


def _normal_p(ranks, n, m, u):
    size = n + m
    _, ties = np.unique(ranks, return_counts=True)
    tie_term = float((ties ** 3 - ties).sum()) / (size * (size - 1))
    variance = n * m / 12 * ((size + 1) - tie_term)
    if variance <= 0:
        return 1.0
    z = max(abs(u - n * m / 2) - 0.5, 0.0) / np.sqrt(variance)
    return float(min(1.0, 2 * norm.sf(z)))


def mann_whitney_u(x, y, exact_limit=None):
    """
    Two-sided Mann-Whitney U test

    Returns:
        (U of x, p-value)
    """
    exact_limit = settings.LIBEXPERT['EXACT_TEST_LIMIT'] if exact_limit is None else exact_limit
    x, y = _check(x, y)
    n, m = len(x), len(y)
    ranks = rankdata(np.concatenate([x, y]))
    u = float(ranks[:n].sum() - n * (n + 1) / 2)
    if n + m <= exact_limit:
        return u, _exact_p(ranks, n, u)
    return u, _normal_p(ranks, n, m, u)


def magnitude(delta):
    for bound, name in MAGNITUDE_BANDS:
        if abs(delta) < bound:
            return name
    return LARGE


def cliffs_delta(x, y):
    """
    Cliff's delta of x against y

    Returns:
        (d, magnitude) with d = (#{x > y} - #{x < y}) / (|x| |y|)
    """
    x, y = _check(x, y)
    greater = int((x[:, None] > y[None, :]).sum())
    less = int((x[:, None] < y[None, :]).sum())
    d = (greater - less) / (len(x) * len(y))
    return d, magnitude(d)
