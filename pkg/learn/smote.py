"""
SMOTE oversampling of the minority class of a training set.
"""
import logging
import math

import numpy as np
from sklearn.neighbors import NearestNeighbors

from .exceptions import SamplingError

logger = logging.getLogger(__name__)


def smote(minority_rows, knn, pct, rng):
    """
    Synthesize minority rows

    Each synthetic row is p + u * (q - p) with p a minority row drawn without
    replacement, q one of p's knn nearest minority neighbours (Euclidean) and
    u uniform in [0, 1].

    Args:
        minority_rows: 2-D array of the minority class
        knn: neighbour count
        pct: share of the minority size to synthesize, e.g. 0.30
        rng: numpy Generator

    Returns:
        array of ceil(pct * n) synthetic rows
    """
    minority_rows = np.asarray(minority_rows, dtype=float)
    n = len(minority_rows)
    if n <= knn:
        raise SamplingError(
            f"SMOTE needs more than knn={knn} minority rows, got {n}; use a smaller knn"
        )

    count = math.ceil(round(pct * n, 9))
    if count == 0:
        return np.empty((0, minority_rows.shape[1]))

    neighbours = NearestNeighbors(n_neighbors=knn + 1).fit(minority_rows)
    _, index = neighbours.kneighbors(minority_rows)

    # drop each row's own entry; duplicates may put it in any position
    candidates = np.array([
        [j for j in row if j != i][:knn] for i, row in enumerate(index)
    ])

    bases = rng.choice(n, size=count, replace=count > n)
    picks = rng.integers(0, knn, size=count)
    gaps = rng.random(size=count)

    p = minority_rows[bases]
    q = minority_rows[candidates[bases, picks]]
    return p + gaps[:, None] * (q - p)


def minority_class(labels):
    """Smallest class present in labels; lower index on ties"""
    classes, counts = np.unique(labels, return_counts=True)
    return int(classes[np.argmin(counts)])


def oversample(rows, labels, knn, pct, rng):
    """
    Append SMOTE rows for the minority class of a training set

    Returns:
        (rows, labels, synthetic) where synthetic is the appended block
    """
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels)
    target = minority_class(labels)
    synthetic = smote(rows[labels == target], knn, pct, rng)
    logger.debug(f"SMOTE added {len(synthetic)} rows to class {target}")
    return (
        np.vstack([rows, synthetic]),
        np.concatenate([labels, np.full(len(synthetic), target, dtype=labels.dtype)]),
        synthetic,
    )
