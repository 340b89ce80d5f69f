"""
Classifier backends: random forest, one-vs-one SVM and the ZeroR baseline.

Class scores are vote fractions (forest: tree votes; SVM: pairwise votes) and
predictions are the top-voted class, lower class index on ties.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.svm import SVC

from .exceptions import TrainingError
from .folds import seed_from

logger = logging.getLogger(__name__)

RANDOM_FOREST = 'rf'
MAX_MARGIN = 'svm'
ZERO_R = 'zeror'

KINDS = (RANDOM_FOREST, MAX_MARGIN, ZERO_R)

# Column headings of the supervised report
DISPLAY_NAMES = {
    RANDOM_FOREST: 'RForest',
    MAX_MARGIN: 'SVM',
    ZERO_R: 'Baseline',
}


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    n_classes: int
    classes: tuple
    hyperparams: dict = field(default_factory=dict)
    estimator: object = None
    constant: int = None


def zero_r(labels, n_classes=None):
    """Constant predictor of the modal class; ties go to the lower class index"""
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise TrainingError("ZeroR needs at least one label")
    n_classes = n_classes or int(labels.max()) + 1
    counts = np.bincount(labels, minlength=n_classes)
    return TrainedModel(
        kind=ZERO_R,
        n_classes=n_classes,
        classes=tuple(int(c) for c in np.unique(labels)),
        constant=int(np.argmax(counts)),
    )


def train(kind, rows, labels, hyperparams, rng, n_classes=None):
    """
    Fit a classifier

    Args:
        kind: 'rf', 'svm' or 'zeror'
        rows: preprocessed feature rows
        labels: integer class indexes aligned with rows
        hyperparams: estimator parameters (a grid point)
        rng: numpy Generator; the estimator's random_state is drawn from it
        n_classes: size of the class scheme; defaults to max label + 1

    Raises:
        TrainingError: single-class training data or an unknown kind
    """
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_classes = n_classes or int(labels.max()) + 1

    if kind == ZERO_R:
        return zero_r(labels, n_classes)

    classes = np.unique(labels)
    if len(classes) < 2:
        raise TrainingError(f"Training data holds a single class ({classes[0] if len(classes) else 'none'})")

    hyperparams = dict(hyperparams or {})
    if kind == RANDOM_FOREST:
        estimator = RandomForestClassifier(random_state=seed_from(rng), n_jobs=1, **hyperparams)
    elif kind == MAX_MARGIN:
        estimator = SVC(decision_function_shape='ovo', random_state=seed_from(rng), **hyperparams)
    else:
        raise TrainingError(f"Unknown classifier kind: {kind}")

    estimator.fit(rows, labels)
    logger.debug(f"Trained {kind} on {len(rows)} rows with {hyperparams}")
    return TrainedModel(
        kind=kind,
        n_classes=n_classes,
        classes=tuple(int(c) for c in classes),
        hyperparams=hyperparams,
        estimator=estimator,
    )


def _forest_votes(model, rows):
    votes = np.zeros((len(rows), model.n_classes))
    fitted = model.estimator.classes_
    for tree in model.estimator.estimators_:
        # sub-estimators predict positions in classes_
        winners = fitted[tree.predict(rows).astype(int)]
        votes[np.arange(len(rows)), winners] += 1
    return votes / len(model.estimator.estimators_)


def _pairwise_votes(model, rows):
    fitted = model.estimator.classes_
    decision = model.estimator.decision_function(rows)
    votes = np.zeros((len(rows), model.n_classes))
    if len(fitted) == 2:
        # binary decision values are positive for classes_[1]
        decision = -np.asarray(decision).reshape(-1, 1)
    for column, (i, j) in enumerate(combinations(range(len(fitted)), 2)):
        wins_i = decision[:, column] >= 0
        votes[wins_i, fitted[i]] += 1
        votes[~wins_i, fitted[j]] += 1
    pairs = len(fitted) * (len(fitted) - 1) // 2
    return votes / pairs


def class_scores(model, rows):
    """Per-class vote fractions, one column per scheme class"""
    rows = np.asarray(rows, dtype=float)
    if model.kind == ZERO_R:
        scores = np.zeros((len(rows), model.n_classes))
        scores[:, model.constant] = 1.0
        return scores
    if model.kind == RANDOM_FOREST:
        return _forest_votes(model, rows)
    return _pairwise_votes(model, rows)


def predict(model, rows):
    """Top-voted class per row; argmax keeps the lower class on ties"""
    return np.argmax(class_scores(model, rows), axis=1)
