import math

import numpy as np
from django.test import SimpleTestCase

from .classifiers import class_scores, predict, train, zero_r
from .evaluation import cross_validate, evaluate, kappa_from_confusion, pairwise_auc
from .exceptions import FoldError, SamplingError, TrainingError
from .folds import stratified_folds
from .labels import FIVE, TERNARY, GroundTruthLabel, class_names, ternary_of
from .search import grid_search, run_supervised
from .smote import minority_class, oversample, smote

TERNARY_NAMES = class_names(TERNARY)


def counts_to_truth(counts):
    return np.repeat(np.arange(len(counts)), counts)


def rings(rng, sizes, width=0.3):
    """Concentric 2-d rings of radius 1, 3, 5, ... one per size"""
    rows, labels = [], []
    for label, size in enumerate(sizes):
        angle = rng.uniform(0, 2 * np.pi, size)
        radius = 1 + 2 * label + rng.normal(0, width, size)
        rows.append(np.column_stack([radius * np.cos(angle), radius * np.sin(angle)]))
        labels.append(np.full(size, label))
    return np.vstack(rows), np.concatenate(labels)


def blobs(rng, sizes, spread=0.5, distance=6.0, dims=4):
    """Well-separated gaussian classes, one per size"""
    rows, labels = [], []
    for label, size in enumerate(sizes):
        center = np.zeros(dims)
        center[label % dims] = distance * (1 + label // dims)
        rows.append(rng.normal(center, spread, size=(size, dims)))
        labels.append(np.full(size, label))
    return np.vstack(rows), np.concatenate(labels)


class LabelTestCase(SimpleTestCase):
    """Test cases for the class schemes"""

    def test_ternary_mapping(self):
        self.assertEqual([ternary_of(score) for score in range(1, 6)],
                         ['novice', 'novice', 'intermediate', 'expert', 'expert'])

    def test_class_indexes(self):
        label = GroundTruthLabel('alice', 'react', 5)
        self.assertEqual(label.ternary, 'expert')
        self.assertEqual(label.class_index(TERNARY), 2)
        self.assertEqual(label.class_index(FIVE), 4)
        self.assertEqual(class_names(FIVE)[label.class_index(FIVE)], 'Expert 5')

    def test_out_of_range_score(self):
        with self.assertRaises(ValueError):
            GroundTruthLabel('carol', 'react', 7)


class BaselineOracleTestCase(SimpleTestCase):
    """ZeroR on known class distributions"""

    def baseline(self, counts, names=TERNARY_NAMES):
        truth = counts_to_truth(counts)
        model = zero_r(truth, n_classes=len(names))
        predicted = predict(model, np.zeros((len(truth), 1)))
        return evaluate(predicted, truth, names, scores=class_scores(model, np.zeros((len(truth), 1))))

    def test_react(self):
        report = self.baseline([54, 110, 254])
        self.assertAlmostEqual(report.precision['Expert'], 0.61, delta=0.005)
        self.assertEqual(report.recall['Expert'], 1.0)
        self.assertAlmostEqual(report.f_measure, 0.25, delta=0.005)
        self.assertEqual(report.kappa, 0.0)
        self.assertEqual(report.auc, 0.5)

    def test_node_mongodb(self):
        report = self.baseline([18, 23, 27])
        self.assertAlmostEqual(report.f_measure, 0.19, delta=0.005)
        self.assertAlmostEqual(report.precision['Expert'], 0.40, delta=0.005)

    def test_socket_io_majority_is_novice(self):
        report = self.baseline([36, 32, 21])
        self.assertAlmostEqual(report.f_measure, 0.19, delta=0.005)
        self.assertEqual(report.recall['Novice'], 1.0)
        self.assertEqual(report.recall['Expert'], 0.0)

    def test_five_class_scheme(self):
        # 54 novices and 254 experts, split by score
        report = self.baseline([20, 34, 110, 53, 201], names=class_names(FIVE))
        self.assertAlmostEqual(report.f_measure, 0.13, delta=0.005)
        self.assertEqual(set(report.rows()), {
            'Kappa', 'AUC', 'F-measure',
            *(f"Precision ({name})" for name in class_names(FIVE)),
            *(f"Recall ({name})" for name in class_names(FIVE)),
        })

    def test_report_rows_follow_table_layout(self):
        rows = list(self.baseline([54, 110, 254]).rows())
        self.assertEqual(rows, [
            'Kappa', 'AUC',
            'Precision (Novice)', 'Precision (Intermediate)', 'Precision (Expert)',
            'Recall (Novice)', 'Recall (Intermediate)', 'Recall (Expert)',
            'F-measure',
        ])


class MetricTestCase(SimpleTestCase):
    """Test cases for kappa and AUC"""

    def test_constant_predictor_kappa_is_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            truth = rng.integers(0, 3, size=int(rng.integers(5, 200)))
            constant = np.full(len(truth), int(rng.integers(0, 3)))
            confusion = np.zeros((3, 3), dtype=int)
            np.add.at(confusion, (truth, constant), 1)
            self.assertEqual(kappa_from_confusion(confusion), 0.0)

    def test_perfect_agreement(self):
        self.assertEqual(kappa_from_confusion([[5, 0, 0], [0, 3, 0], [0, 0, 9]]), 1.0)

    def test_random_scores_auc_near_half(self):
        rng = np.random.default_rng(1)
        truth = rng.integers(0, 3, size=3000)
        scores = rng.random((3000, 3))
        self.assertAlmostEqual(pairwise_auc(truth, scores), 0.5, delta=0.03)

    def test_perfect_scores_auc_one(self):
        truth = np.array([0, 0, 1, 1, 2, 2])
        self.assertEqual(pairwise_auc(truth, np.eye(3)[truth]), 1.0)

    def test_single_class_truth_rejected(self):
        with self.assertRaises(ValueError):
            evaluate([0, 0], [1, 1], TERNARY_NAMES)


class SmoteTestCase(SimpleTestCase):
    """Test cases for synthetic minority oversampling"""

    def setUp(self):
        self.minority = np.random.default_rng(4).normal(size=(17, 3))

    def test_synthetic_count(self):
        for n in (4, 10, 17):
            synthetic = smote(self.minority[:n], knn=3, pct=0.30, rng=np.random.default_rng(n))
            self.assertEqual(len(synthetic), math.ceil(3 * n / 10))

    def test_points_lie_between_a_row_and_a_nearest_neighbour(self):
        synthetic = smote(self.minority, knn=3, pct=2.0, rng=np.random.default_rng(5))
        distances = np.linalg.norm(self.minority[:, None] - self.minority[None], axis=2)
        np.fill_diagonal(distances, np.inf)
        neighbours = np.argsort(distances, axis=1)[:, :3]

        for point in synthetic:
            found = False
            for p, row in enumerate(self.minority):
                for q in neighbours[p]:
                    segment = self.minority[q] - row
                    u = float(np.dot(point - row, segment) / np.dot(segment, segment))
                    if -1e-9 <= u <= 1 + 1e-9 and np.allclose(row + u * segment, point, atol=1e-9):
                        found = True
            self.assertTrue(found)

    def test_too_few_minority_rows(self):
        with self.assertRaises(SamplingError):
            smote(self.minority[:3], knn=3, pct=0.3, rng=np.random.default_rng(0))

    def test_minority_class_lower_index_on_ties(self):
        self.assertEqual(minority_class([2, 2, 0, 0, 1, 1, 1]), 0)

    def test_oversample_appends_to_minority(self):
        rows = np.vstack([self.minority, np.random.default_rng(6).normal(size=(30, 3))])
        labels = np.array([1] * 17 + [0] * 30)
        grown, grown_labels, synthetic = oversample(rows, labels, 3, 0.3, np.random.default_rng(2))
        self.assertEqual(len(synthetic), 6)
        self.assertEqual(len(grown), 53)
        self.assertTrue((grown_labels[-6:] == 1).all())


class FoldTestCase(SimpleTestCase):
    """Test cases for stratified folds"""

    def test_per_class_balance(self):
        labels = np.array([0] * 10 + [1] * 5)
        folds = stratified_folds(labels, 5, np.random.default_rng(3))
        for fold in range(5):
            self.assertEqual(int(((folds == fold) & (labels == 0)).sum()), 2)
            self.assertEqual(int(((folds == fold) & (labels == 1)).sum()), 1)

    def test_uneven_classes_within_one(self):
        labels = np.array([0] * 13 + [1] * 7 + [2] * 22)
        folds = stratified_folds(labels, 5, np.random.default_rng(8))
        for cls in range(3):
            sizes = [int(((folds == fold) & (labels == cls)).sum()) for fold in range(5)]
            self.assertLessEqual(max(sizes) - min(sizes), 1)

    def test_react_distribution(self):
        labels = counts_to_truth([54, 110, 254])
        folds = stratified_folds(labels, 5, np.random.default_rng(9))
        expected = {0: (10, 11), 1: (22,), 2: (50, 51)}
        for cls, allowed in expected.items():
            sizes = [int(((folds == fold) & (labels == cls)).sum()) for fold in range(5)]
            self.assertTrue(all(size in allowed for size in sizes), sizes)
            self.assertEqual(sum(sizes), int((labels == cls).sum()))

    def test_small_class_named(self):
        with self.assertRaises(FoldError) as ctx:
            stratified_folds(np.array([0] * 10 + [2] * 3), 5, np.random.default_rng(0), TERNARY_NAMES)
        self.assertIn('Expert', str(ctx.exception))

    def test_seeded(self):
        labels = np.array([0] * 10 + [1] * 10)
        self.assertTrue((stratified_folds(labels, 5, np.random.default_rng(1))
                         == stratified_folds(labels, 5, np.random.default_rng(1))).all())


class ClassifierTestCase(SimpleTestCase):
    """Test cases for the classifier backends"""

    def setUp(self):
        rng = np.random.default_rng(10)
        self.rows, self.labels = blobs(rng, [25, 25, 15])
        self.held_rows, self.held_labels = blobs(rng, [10, 10, 10])

    def test_separable_classes(self):
        for kind, params in (('rf', {'n_estimators': 20}), ('svm', {'kernel': 'linear', 'C': 1})):
            with self.subTest(kind=kind):
                model = train(kind, self.rows, self.labels, params, np.random.default_rng(0))
                self.assertTrue((predict(model, self.held_rows) == self.held_labels).all())

    def test_single_tree_memorizes_training_rows(self):
        params = {'n_estimators': 1, 'bootstrap': False, 'max_features': None}
        model = train('rf', self.rows, self.labels, params, np.random.default_rng(0))
        self.assertTrue((predict(model, self.rows) == self.labels).all())

    def test_vote_fractions(self):
        model = train('rf', self.rows, self.labels, {'n_estimators': 10}, np.random.default_rng(0))
        scores = class_scores(model, self.held_rows)
        np.testing.assert_allclose(scores.sum(axis=1), 1.0)
        self.assertTrue(np.isin(np.round(scores * 10, 9), np.arange(11)).all())

    def test_pairwise_votes_agree_with_estimator(self):
        model = train('svm', self.rows, self.labels, {'kernel': 'rbf', 'C': 1}, np.random.default_rng(0))
        unseen = np.random.default_rng(11).normal(0, 4, size=(200, 4))
        np.testing.assert_array_equal(predict(model, unseen), model.estimator.predict(unseen))

    def test_binary_svm_vote_direction(self):
        mask = self.labels < 2
        model = train('svm', self.rows[mask], self.labels[mask], {'kernel': 'linear'}, np.random.default_rng(0))
        held = self.held_labels < 2
        self.assertTrue((predict(model, self.held_rows[held]) == self.held_labels[held]).all())

    def test_missing_class_gets_zero_score(self):
        mask = self.labels != 1
        model = train('rf', self.rows[mask], self.labels[mask], {'n_estimators': 5}, np.random.default_rng(0),
                      n_classes=3)
        self.assertTrue((class_scores(model, self.held_rows)[:, 1] == 0).all())

    def test_single_class_rejected(self):
        with self.assertRaises(TrainingError):
            train('rf', self.rows[:5], np.zeros(5, dtype=int), {}, np.random.default_rng(0))

    def test_zero_r_ties_go_to_lower_class(self):
        self.assertEqual(zero_r([2, 2, 1, 1, 0]).constant, 1)


class CrossValidationTestCase(SimpleTestCase):
    """Test cases for the cross-validation harness and grid search"""

    def setUp(self):
        self.rows, self.labels = blobs(np.random.default_rng(12), [20, 20, 12])

    def test_synthetic_rows_never_evaluated(self):
        _, _, folds, audit = cross_validate('rf', self.rows, self.labels, {'n_estimators': 10}, 3,
                                            np.random.default_rng(2))
        self.assertEqual(len(audit), 5)
        for entry in audit:
            self.assertEqual(entry['synthetic_in_test'], 0)
            held = int((folds == entry['fold']).sum())
            self.assertEqual(entry['test_rows'], held)
            minority = int(((folds != entry['fold']) & (self.labels == 2)).sum())
            self.assertEqual(entry['synthetic_rows'], math.ceil(3 * minority / 10))

    def test_zero_r_not_oversampled(self):
        _, _, _, audit = cross_validate('zeror', self.rows, self.labels, {}, 3, np.random.default_rng(2))
        self.assertTrue(all(entry['synthetic_rows'] == 0 for entry in audit))

    def test_grid_ties_keep_earlier_point(self):
        best, scores = grid_search('rf', {'max_depth': [None, 50]}, self.rows, self.labels,
                                   np.random.default_rng(3))
        self.assertEqual(scores[0][1], scores[1][1])
        self.assertEqual(best, {'max_depth': None})

    def test_grid_scores_are_mean_fold_f(self):
        grid = {'n_estimators': [10], 'max_depth': [2, None]}
        _, scores = grid_search('rf', grid, self.rows, self.labels, np.random.default_rng(3))
        seed = int(np.random.default_rng(3).integers(0, 2 ** 31 - 1))
        for params, score in scores:
            predictions, _, folds, _ = cross_validate('rf', self.rows, self.labels, params, 3,
                                                      np.random.default_rng(seed))
            per_fold = [
                evaluate(predictions[folds == fold], self.labels[folds == fold], TERNARY_NAMES).f_measure
                for fold in range(5)
            ]
            self.assertAlmostEqual(score, float(np.mean(per_fold)), places=12)

    def test_depth_one_forest_loses_on_rings(self):
        rows, labels = rings(np.random.default_rng(10), [30, 40, 50])
        grid = {'n_estimators': [25], 'max_depth': [1, None]}
        best, scores = grid_search('rf', grid, rows, labels, np.random.default_rng(11))
        self.assertEqual(best['max_depth'], None)
        self.assertGreater(scores[1][1], scores[0][1] + 0.2)

    def test_forest_beats_zero_r_on_rings(self):
        rows, labels = rings(np.random.default_rng(13), [30, 40, 50])
        forest, _, _, _ = cross_validate('rf', rows, labels, {'n_estimators': 25}, 3, np.random.default_rng(14))
        baseline, _, _, _ = cross_validate('zeror', rows, labels, {}, 3, np.random.default_rng(14))
        forest_accuracy = float((forest == labels).mean())
        self.assertAlmostEqual(float((baseline == labels).mean()), 50 / 120)
        self.assertGreater(forest_accuracy, 0.85)

    def test_run_supervised_report(self):
        report = run_supervised('rf', self.rows, self.labels, TERNARY, np.random.default_rng(4),
                                grid={'n_estimators': [10], 'max_depth': [None, 3]})
        self.assertEqual(report.classifier, 'RForest')
        self.assertGreater(report.kappa, 0.8)
        self.assertEqual(len(report.grid_scores), 2)
        self.assertEqual(len(report.folds), len(self.labels))
        self.assertIn(report.hyperparameters['max_depth'], (None, 3))
        document = report.to_dict()
        self.assertEqual(document['classes'], ['Novice', 'Intermediate', 'Expert'])
        self.assertEqual(sum(map(sum, document['confusion_matrix'])), len(self.labels))

    def test_run_supervised_is_seeded(self):
        grid = {'kernel': ['linear', 'rbf'], 'C': [1]}
        first = run_supervised('svm', self.rows, self.labels, TERNARY, np.random.default_rng(5), grid=grid)
        again = run_supervised('svm', self.rows, self.labels, TERNARY, np.random.default_rng(5), grid=grid)
        self.assertEqual(first.to_dict(), again.to_dict())

    def test_five_class_zero_r(self):
        labels = np.repeat(np.arange(5), [6, 6, 8, 6, 12])
        rows = np.random.default_rng(6).normal(size=(len(labels), 3))
        report = run_supervised('zeror', rows, labels, FIVE, np.random.default_rng(7))
        self.assertEqual(report.classifier, 'Baseline')
        self.assertEqual(report.recall['Expert 5'], 1.0)
        self.assertEqual(report.kappa, 0.0)
