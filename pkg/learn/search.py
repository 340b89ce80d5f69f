"""
Grid search and the supervised experiment of one library.
"""
import logging

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed
from sklearn.model_selection import ParameterGrid

from .classifiers import DISPLAY_NAMES, MAX_MARGIN, RANDOM_FOREST, ZERO_R
from .evaluation import cross_validate, evaluate, macro_f_measure
from .exceptions import TrainingError
from .labels import class_names

logger = logging.getLogger(__name__)


def default_grid(kind):
    if kind == RANDOM_FOREST:
        return settings.LIBEXPERT['FOREST_GRID']
    if kind == MAX_MARGIN:
        return settings.LIBEXPERT['SVM_GRID']
    return {}


def mean_fold_f(predictions, labels, folds, n_classes):
    """Mean of the macro F-measures of the individual test folds"""
    values = [
        macro_f_measure(predictions[folds == fold], labels[folds == fold], n_classes)[0]
        for fold in np.unique(folds)
    ]
    return float(np.mean(values))


def _cv_score(kind, rows, labels, params, n_classes, seed, cv):
    predictions, _, folds, _ = cross_validate(
        kind, rows, labels, params, n_classes, np.random.default_rng(seed), **cv
    )
    return mean_fold_f(predictions, labels, folds, n_classes)


def grid_search(kind, grid, rows, labels, rng, n_classes=None, jobs=None, **cv):
    """
    Grid point with the best mean cross-validated macro F-measure

    A point scores the mean of its per-fold macro F-measures. Every point is
    cross-validated on the same folds. Ties keep the earlier point in grid order.

    Returns:
        (best params, [(params, score), ...] in grid order)
    """
    points = list(ParameterGrid(grid))
    if not points:
        raise TrainingError(f"Empty hyperparameter grid for {kind}")

    labels = np.asarray(labels, dtype=int)
    n_classes = n_classes or int(labels.max()) + 1
    jobs = jobs or settings.LIBEXPERT['JOBS']
    seed = int(rng.integers(0, 2 ** 31 - 1))

    scores = Parallel(n_jobs=jobs, prefer='threads')(
        delayed(_cv_score)(kind, rows, labels, params, n_classes, seed, cv) for params in points
    )

    best = 0
    for index, score in enumerate(scores):
        if score > scores[best]:
            best = index
    logger.info(f"{kind}: best of {len(points)} grid points is {points[best]} (F={scores[best]:.3f})")
    return points[best], list(zip(points, scores))


def run_supervised(kind, rows, labels, scheme, rng, grid=None, k=None, knn=None, pct=None):
    """
    Grid-search, cross-validate and score one classifier

    Args:
        kind: 'rf', 'svm' or 'zeror'
        rows: cleaned feature rows of the labelled developers
        labels: class indexes under the scheme
        scheme: 'ternary' or 'five'
        rng: numpy Generator for this classifier

    Returns:
        ClassifierReport
    """
    options = settings.LIBEXPERT
    cv = {
        'k': k or options['CV_FOLDS'],
        'knn': knn or options['SMOTE_KNN'],
        'pct': pct or options['SMOTE_PCT'],
    }
    names = class_names(scheme)
    search_rng, cv_rng = rng.spawn(2)

    params, grid_scores = {}, []
    if kind != ZERO_R:
        params, grid_scores = grid_search(
            kind, grid or default_grid(kind), rows, labels, search_rng, n_classes=len(names), **cv
        )

    predictions, scores, folds, audit = cross_validate(
        kind, rows, labels, params, len(names), cv_rng, **cv
    )
    report = evaluate(predictions, labels, names, scores=scores, classifier=DISPLAY_NAMES[kind], scheme=scheme)
    report.hyperparameters = params
    report.folds = [int(fold) for fold in folds]
    report.fold_audit = audit
    report.grid_scores = [{'params': p, 'f_measure': s} for p, s in grid_scores]
    logger.info(f"{DISPLAY_NAMES[kind]} ({scheme}): F={report.f_measure:.3f} kappa={report.kappa:.3f} AUC={report.auc:.3f}")
    return report
