"""
Metric suite and the cross-validation harness.

F-measure is the harmonic mean of macro precision and macro recall. Kappa is
computed from integer confusion counts, so any constant predictor scores
exactly 0. Multi-class AUC is the unweighted mean of pairwise one-vs-one AUCs.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support, roc_auc_score

from .classifiers import ZERO_R, class_scores, predict, train
from .folds import stratified_folds
from .smote import oversample

logger = logging.getLogger(__name__)


@dataclass
class ClassifierReport:
    classifier: str
    scheme: str
    class_names: tuple
    precision: dict
    recall: dict
    f_measure: float
    kappa: float
    auc: float
    confusion: list
    hyperparameters: dict = field(default_factory=dict)
    folds: list = field(default_factory=list)
    fold_audit: list = field(default_factory=list)
    grid_scores: list = field(default_factory=list)

    def rows(self):
        """Flat metric rows: kappa, AUC, per-class precision and recall, F-measure"""
        rows = {'Kappa': self.kappa, 'AUC': self.auc}
        for name in self.class_names:
            rows[f"Precision ({name})"] = self.precision[name]
        for name in self.class_names:
            rows[f"Recall ({name})"] = self.recall[name]
        rows['F-measure'] = self.f_measure
        return rows

    def to_dict(self):
        return {
            'classifier': self.classifier,
            'scheme': self.scheme,
            'classes': list(self.class_names),
            'metrics': self.rows(),
            'confusion_matrix': self.confusion,
            'hyperparameters': self.hyperparameters,
            'folds': self.folds,
            'fold_audit': self.fold_audit,
            'grid_scores': self.grid_scores,
        }


def kappa_from_confusion(confusion):
    confusion = np.asarray(confusion, dtype=np.int64)
    total = int(confusion.sum())
    agreement = int(np.trace(confusion))
    chance = int((confusion.sum(axis=1) * confusion.sum(axis=0)).sum())
    denominator = total * total - chance
    if denominator == 0:
        return 0.0
    return (total * agreement - chance) / denominator


def pairwise_auc(truth, scores):
    """Mean over class pairs (i, j) present in truth of (A(i|j) + A(j|i)) / 2"""
    truth = np.asarray(truth)
    scores = np.asarray(scores, dtype=float)
    present = sorted(set(truth.tolist()))
    values = []
    for i, j in combinations(present, 2):
        mask = (truth == i) | (truth == j)
        a_ij = roc_auc_score(truth[mask] == i, scores[mask, i])
        a_ji = roc_auc_score(truth[mask] == j, scores[mask, j])
        values.append((a_ij + a_ji) / 2)
    return float(np.mean(values))


def macro_f_measure(predicted, truth, n_classes):
    """Harmonic mean of macro precision and macro recall, with the per-class arrays"""
    precision, recall, _, _ = precision_recall_fscore_support(
        truth, predicted, labels=list(range(n_classes)), average=None, zero_division=0,
    )
    macro_p, macro_r = float(np.mean(precision)), float(np.mean(recall))
    f_measure = 0.0 if macro_p + macro_r == 0 else 2 * macro_p * macro_r / (macro_p + macro_r)
    return f_measure, precision, recall


def evaluate(predicted, truth, class_names, scores=None, classifier='', scheme=''):
    """
    Score predictions against ground truth

    Args:
        predicted: class indexes
        truth: class indexes, at least two classes present
        class_names: display names, one per class index of the scheme
        scores: per-class scores for AUC; one-hot predictions when omitted

    Returns:
        ClassifierReport
    """
    predicted = np.asarray(predicted, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predicted.shape != truth.shape:
        raise ValueError(f"{len(predicted)} predictions for {len(truth)} labels")
    if len(set(truth.tolist())) < 2:
        raise ValueError("Evaluation needs at least two classes in the ground truth")

    labels = list(range(len(class_names)))
    f_measure, precision, recall = macro_f_measure(predicted, truth, len(class_names))

    confusion = confusion_matrix(truth, predicted, labels=labels)
    if scores is None:
        scores = np.eye(len(class_names))[predicted]

    return ClassifierReport(
        classifier=classifier,
        scheme=scheme,
        class_names=tuple(class_names),
        precision={name: float(p) for name, p in zip(class_names, precision)},
        recall={name: float(r) for name, r in zip(class_names, recall)},
        f_measure=f_measure,
        kappa=kappa_from_confusion(confusion),
        auc=pairwise_auc(truth, scores),
        confusion=confusion.tolist(),
    )


def row_digest(row):
    return hashlib.sha256(np.ascontiguousarray(row, dtype=float).tobytes()).hexdigest()[:16]


def cross_validate(kind, rows, labels, hyperparams, n_classes, rng, k=5, knn=3, pct=0.30):
    """
    Stratified k-fold cross-validation with SMOTE on the training folds

    Folds, SMOTE and estimators draw from independent children of rng so
    grid points sharing a seed see the same folds.

    Returns:
        (pooled predictions, pooled class scores, fold assignment, fold audit)
    """
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels, dtype=int)
    fold_rng, smote_rng, model_rng = rng.spawn(3)
    folds = stratified_folds(labels, k, fold_rng)

    originals = {row_digest(row) for row in rows}
    predictions = np.empty(len(labels), dtype=int)
    scores = np.zeros((len(labels), n_classes))
    audit = []

    for fold in range(k):
        train_mask = folds != fold
        test_rows = rows[~train_mask]
        train_rows, train_labels = rows[train_mask], labels[train_mask]

        synthetic = np.empty((0, rows.shape[1]))
        if kind != ZERO_R:
            train_rows, train_labels, synthetic = oversample(train_rows, train_labels, knn, pct, smote_rng)

        model = train(kind, train_rows, train_labels, hyperparams, model_rng, n_classes=n_classes)
        predictions[~train_mask] = predict(model, test_rows)
        scores[~train_mask] = class_scores(model, test_rows)

        synthetic_digests = {row_digest(row) for row in synthetic} - originals
        test_digests = [row_digest(row) for row in test_rows]
        audit.append({
            'fold': fold,
            'train_rows': int(train_mask.sum()),
            'synthetic_rows': len(synthetic),
            'test_rows': len(test_rows),
            'test_digest': hashlib.sha256(''.join(test_digests).encode()).hexdigest(),
            'synthetic_in_test': sum(1 for digest in test_digests if digest in synthetic_digests),
        })

    return predictions, scores, folds, audit
