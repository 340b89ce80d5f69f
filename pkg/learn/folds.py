import numpy as np
from sklearn.model_selection import StratifiedKFold

from .exceptions import FoldError


def seed_from(rng):
    """Integer seed for libraries that take random_state"""
    return int(rng.integers(0, 2 ** 31 - 1))


def stratified_folds(labels, k, rng, class_names=None):
    """
    Assign every row to one of k folds with per-class counts within 1 across folds

    Returns:
        int array, fold index per row

    Raises:
        FoldError: a class has fewer than k members
    """
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    for cls, count in zip(classes, counts):
        if count < k:
            name = class_names[cls] if class_names is not None else cls
            raise FoldError(f"Class {name} has {count} members; {k}-fold stratification needs at least {k}")

    folds = np.empty(len(labels), dtype=int)
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed_from(rng))
    for fold, (_, test) in enumerate(splitter.split(np.zeros(len(labels)), labels)):
        folds[test] = fold
    return folds
