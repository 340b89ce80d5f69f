"""
Cleaning steps, applied in a fixed order: impute, prune correlated features,
log-transform skewed features, and (clustering only) standardize.

Every step returns a new FeatureMatrix whose TransformLog records what it did.
"""
import logging
from dataclasses import replace

import numpy as np
from django.conf import settings

from .exceptions import PreprocessError
from .records import FeatureMatrix

logger = logging.getLogger(__name__)


def _require_complete(matrix, step):
    if matrix.has_missing():
        raise PreprocessError(f"{step} needs an imputed matrix")


def impute_missing(matrix):
    """
    Replace MISSING cells:

    - daysSinceFirstImport, daysSinceLastImport: 0
    - daysBetweenImports: -1 when imports = 0, otherwise 0
    - avgDaysCommitsImportLibrary: maximum observed value of the column
    """
    values = matrix.values.copy()
    rules = {}

    for name in ('daysSinceFirstImport', 'daysSinceLastImport'):
        if name in matrix.columns:
            rules[name] = {'rule': 'constant', 'value': 0}
            column = values[:, matrix.columns.index(name)]
            column[np.isnan(column)] = 0

    if 'daysBetweenImports' in matrix.columns:
        rules['daysBetweenImports'] = {'rule': 'by_imports', 'no_imports': -1, 'some_imports': 0}
        column = values[:, matrix.columns.index('daysBetweenImports')]
        imports = values[:, matrix.columns.index('imports')]
        missing = np.isnan(column)
        column[missing & (imports == 0)] = -1
        column[missing & (imports != 0)] = 0

    name = 'avgDaysCommitsImportLibrary'
    if name in matrix.columns:
        column = values[:, matrix.columns.index(name)]
        observed = column[~np.isnan(column)]
        if observed.size == 0:
            raise PreprocessError(f"{name} is missing for every developer; no observed maximum to impute")
        maximum = float(observed.max())
        rules[name] = {'rule': 'max', 'value': maximum}
        column[np.isnan(column)] = maximum

    filled = int(np.isnan(matrix.values).sum() - np.isnan(values).sum())
    logger.info(f"{matrix.library}: imputed {filled} missing cells")
    return matrix.evolve(values=values, log=replace(matrix.log, imputation=rules))


def pearson_matrix(values):
    """Pairwise Pearson r; a zero-variance column correlates 0 with everything but itself"""
    values = np.asarray(values, dtype=float)
    constant = np.ptp(values, axis=0) == 0
    centered = values - values.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    norms[constant] = 1.0
    r = (centered.T @ centered) / np.outer(norms, norms)
    r[constant, :] = 0.0
    r[:, constant] = 0.0
    np.fill_diagonal(r, 1.0)
    return np.clip(r, -1.0, 1.0)


def prune_correlated(matrix, threshold=None):
    """
    Greedily drop correlated features

    While two active columns have |r| above the threshold, take the pair with
    the largest |r| (first pair in column order on ties) and drop the member
    with the larger mean |r| against the other active columns (the later
    column on ties).

    Returns:
        (matrix, dropped) where dropped lists (name, reason) pairs
    """
    threshold = settings.LIBEXPERT['CORRELATION_THRESHOLD'] if threshold is None else threshold
    _require_complete(matrix, 'Correlation pruning')
    if len(matrix.developers) < 2:
        raise PreprocessError("Correlation pruning needs at least 2 developers")

    active = list(matrix.active)
    r = np.abs(pearson_matrix(matrix.active_values()))
    position = {name: i for i, name in enumerate(active)}

    dropped = []
    while len(active) > 1:
        index = [position[name] for name in active]
        sub = r[np.ix_(index, index)]

        best = None
        for a in range(len(active)):
            for b in range(a + 1, len(active)):
                if sub[a, b] > threshold and (best is None or sub[a, b] > best[0]):
                    best = (sub[a, b], a, b)
        if best is None:
            break

        value, a, b = best
        mean_abs = (sub.sum(axis=1) - 1.0) / (len(active) - 1)
        victim, partner = (a, b) if mean_abs[a] > mean_abs[b] else (b, a)
        reason = f"|r|={value:.3f} with {active[partner]}"
        dropped.append((active[victim], reason))
        logger.info(f"{matrix.library}: dropping {active[victim]} ({reason})")
        del active[victim]

    log = replace(
        matrix.log,
        correlation={
            'columns': list(matrix.active),
            'matrix': [[round(float(x), 6) for x in row] for row in pearson_matrix(matrix.active_values())],
        },
        dropped=[{'feature': name, 'reason': reason} for name, reason in dropped],
        active=list(active),
    )
    return matrix.evolve(active=tuple(active), log=log), dropped


def is_skewed(column, ratio=None):
    ratio = settings.LIBEXPERT['SKEW_RATIO'] if ratio is None else ratio
    median = float(np.median(column))
    mean = float(np.mean(column))
    if median > 0:
        return mean >= ratio * median
    return mean > 0


def transform_skewed(matrix, ratio=None):
    """
    Replace every skewed active column x by ln(1 + x - min(x))

    A column is skewed when its mean is at least `ratio` times its median, or,
    for a non-positive median, when its mean is positive.

    Returns:
        (matrix, transformed column names)
    """
    _require_complete(matrix, 'Skew transformation')
    values = matrix.values.copy()
    skewed = {}
    for name in matrix.active:
        j = matrix.columns.index(name)
        if is_skewed(values[:, j], ratio):
            shift = float(values[:, j].min())
            values[:, j] = np.log1p(values[:, j] - shift)
            skewed[name] = shift

    if skewed:
        logger.info(f"{matrix.library}: log-transformed {', '.join(skewed)}")
    return matrix.evolve(values=values, log=replace(matrix.log, skewed=skewed)), list(skewed)


def standardize(matrix):
    """
    Center every active column to mean 0 and scale it to population s.d. 1

    Constant columns are centered only.

    Returns:
        (matrix, params) with params[name] = {'mean': ..., 'std': ...}
    """
    _require_complete(matrix, 'Standardization')
    if len(matrix.developers) < 2:
        raise PreprocessError("Standardization needs at least 2 developers")

    values = matrix.values.copy()
    params = {}
    for name in matrix.active:
        j = matrix.columns.index(name)
        mean = float(values[:, j].mean())
        std = float(values[:, j].std(ddof=0))
        if np.ptp(values[:, j]) == 0:
            std = 0.0
        values[:, j] = values[:, j] - mean
        if std > 0:
            values[:, j] = values[:, j] / std
        params[name] = {'mean': mean, 'std': std}
    return matrix.evolve(values=values, log=replace(matrix.log, standardization=params)), params


def unstandardize(matrix, params):
    values = matrix.values.copy()
    for name, p in params.items():
        j = matrix.columns.index(name)
        if p['std'] > 0:
            values[:, j] = values[:, j] * p['std']
        values[:, j] = values[:, j] + p['mean']
    return matrix.evolve(values=values)


def clean_features(vectors, library='', threshold=None):
    """
    Run impute, prune and transform over a library's feature vectors

    The standardization parameters of the result are computed and logged so
    the clustering track and TransformLog.apply can replay them; the returned
    values themselves are not standardized.
    """
    if not vectors:
        raise PreprocessError(f"{library}: no candidate experts to preprocess")
    matrix = FeatureMatrix.from_vectors(vectors, library=library)
    matrix = impute_missing(matrix)
    matrix, _ = prune_correlated(matrix, threshold)
    matrix, _ = transform_skewed(matrix)
    _, params = standardize(matrix)
    return matrix.evolve(log=replace(matrix.log, standardization=params))
