import itertools
import tempfile
from pathlib import Path
from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase

from preprocess.records import TransformLog
from .exceptions import ClusteringError
from .kmeans import kmeans, lloyd
from .selection import (
    LIKELY_EXPERT, UNKNOWN, ClusterModel, composition_of, expert_threshold, intersect_experts, predict_expert,
    select_expert_cluster,
)
from .serializers import dump_model, load_model, read_verdicts, write_intersection, write_verdicts


def optimal_inertia(rows, k):
    """Exhaustive minimum over every assignment of rows to k non-empty groups"""
    n = len(rows)
    assignments = np.array(list(itertools.product(range(k), repeat=n)))
    onehot = np.eye(k)[assignments]
    counts = onehot.sum(axis=1)
    usable = (counts > 0).all(axis=1)
    sums = np.einsum('mnk,nd->mkd', onehot[usable], rows)
    explained = ((sums ** 2).sum(axis=2) / counts[usable]).sum(axis=1)
    return float((rows ** 2).sum() - explained.max())


def planted_population(rng, dense=60, dense_experts=54, sparse=140, sparse_experts=28):
    """A tight expert-heavy population next to a wide, mostly non-expert one"""
    rows = np.vstack([
        rng.normal(0.0, 0.5, size=(dense, 2)),
        rng.normal(20.0, 3.0, size=(sparse, 2)),
    ])
    labels = (
        ['expert'] * dense_experts + ['novice'] * (dense - dense_experts)
        + ['expert'] * sparse_experts + ['novice', 'intermediate'] * ((sparse - sparse_experts) // 2)
    )
    return rows, labels


def two_centroid_model():
    return ClusterModel(
        k=2,
        centroids=np.array([[0.0, 0.0], [10.0, 10.0]]),
        assignment={},
        composition=[],
        expert_cluster=0,
        threshold_used=0.6,
    )


class KMeansTestCase(SimpleTestCase):
    """Test cases for k-means"""

    def test_two_pairs(self):
        fit = kmeans(np.array([[0.0], [0.0], [10.0], [10.0]]), 2, restarts=5, rng=np.random.default_rng(0))
        self.assertEqual(sorted(fit.centroids.ravel().tolist()), [0.0, 10.0])
        self.assertEqual(fit.inertia, 0.0)

    def test_one_cluster_per_distinct_point(self):
        rows = np.array([[0, 0], [0, 0], [1, 5], [3, 3], [3, 3], [8, 1], [2, 9]], dtype=float)
        fit = kmeans(rows, 5, restarts=5, rng=np.random.default_rng(1))
        self.assertEqual(fit.inertia, 0.0)

    def test_exhaustive_optimum_on_small_instances(self):
        rng = np.random.default_rng(20180430)
        matches = 0
        for _ in range(100):
            k = int(rng.integers(1, 4))
            n = int(rng.integers(max(k, 2), 9))
            rows = rng.normal(size=(n, 2))
            best = optimal_inertia(rows, k)
            fit = kmeans(rows, k, restarts=50, rng=rng, jobs=1)
            self.assertGreaterEqual(fit.inertia, best - 1e-9)
            matches += abs(fit.inertia - best) <= 1e-9 * (1 + best)
        self.assertGreaterEqual(matches, 98)

    def test_lloyd_assignment_is_nearest_centroid(self):
        rows = np.random.default_rng(2).normal(size=(40, 3))
        fit = lloyd(rows, rows[:4])
        distances = ((rows[:, None] - fit.centroids[None]) ** 2).sum(axis=2)
        np.testing.assert_array_equal(fit.assignment, np.argmin(distances, axis=1))

    def test_seeded(self):
        rows = np.random.default_rng(3).normal(size=(30, 2))
        first = kmeans(rows, 3, restarts=4, rng=np.random.default_rng(9), jobs=1)
        again = kmeans(rows, 3, restarts=4, rng=np.random.default_rng(9), jobs=2)
        np.testing.assert_array_equal(first.centroids, again.centroids)
        self.assertEqual(first.inertia, again.inertia)

    def test_more_clusters_than_rows(self):
        with self.assertRaises(ClusteringError):
            kmeans(np.zeros((2, 2)), 3, restarts=1, rng=np.random.default_rng(0))


class SelectionTestCase(SimpleTestCase):
    """Test cases for expert-cluster selection"""

    def test_threshold_follows_base_rate(self):
        self.assertEqual(expert_threshold(['expert', 'expert', 'novice', None]), 0.70)
        self.assertEqual(expert_threshold(['expert', 'novice', 'intermediate']), 0.60)
        self.assertEqual(expert_threshold(['expert'], override=0.5), 0.5)

    def test_composition_ignores_unlabelled(self):
        composition = composition_of([0, 0, 1, 1], ['expert', None, 'novice', 'expert'], 2)
        self.assertEqual(composition[0]['members'], 2)
        self.assertEqual(composition[0]['labelled'], 1)
        self.assertEqual(composition[0]['expert'], 1.0)
        self.assertEqual(composition[1]['expert'], 0.5)

    def test_planted_population(self):
        rows, labels = planted_population(np.random.default_rng(11))
        model = select_expert_cluster(rows, labels, k_max=6, rng=np.random.default_rng(5), restarts=10)
        self.assertEqual(model.k, 2)
        self.assertEqual(model.threshold_used, 0.60)
        self.assertFalse(model.below_threshold)
        self.assertGreaterEqual(model.composition[model.expert_cluster]['expert'], 0.60)
        self.assertEqual(model.selection_trace[0]['k'], 2)

        held_rows, held_labels = planted_population(np.random.default_rng(12))
        flagged = [
            label for row, label in zip(held_rows, held_labels)
            if predict_expert(model, row)[0] == LIKELY_EXPERT
        ]
        self.assertTrue(flagged)
        self.assertGreaterEqual(flagged.count('expert') / len(flagged), 0.85)

    def test_below_threshold_keeps_best_model(self):
        rng = np.random.default_rng(13)
        rows = rng.normal(size=(30, 2))
        labels = ['expert', 'novice', 'intermediate'] * 10
        model = select_expert_cluster(rows, labels, k_max=3, rng=rng, threshold=0.99, restarts=3)
        self.assertTrue(model.below_threshold)
        self.assertEqual(len(model.selection_trace), 2)
        best = max(step['best_expert_fraction'] for step in model.selection_trace)
        self.assertEqual(model.composition[model.expert_cluster]['expert'], best)

    def test_needs_labelled_experts(self):
        rows = np.zeros((4, 2))
        with self.assertRaises(ClusteringError):
            select_expert_cluster(rows, [None] * 4, rng=np.random.default_rng(0))
        with self.assertRaises(ClusteringError):
            select_expert_cluster(rows, ['novice'] * 4, rng=np.random.default_rng(0))


class PredictExpertTestCase(SimpleTestCase):
    """Test cases for the centroid-distance predictor"""

    def test_near_expert_centroid(self):
        verdict, margin = predict_expert(two_centroid_model(), [1, 1])
        self.assertEqual(verdict, LIKELY_EXPERT)
        self.assertAlmostEqual(margin, np.sqrt(162) - np.sqrt(2))

    def test_equidistant_is_unknown(self):
        self.assertEqual(predict_expert(two_centroid_model(), [5, 5]), (UNKNOWN, 0.0))

    def test_near_other_centroid(self):
        verdict, margin = predict_expert(two_centroid_model(), [9, 9])
        self.assertEqual(verdict, UNKNOWN)
        self.assertLess(margin, 0)

    def test_isometry_invariant(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            centroids = rng.normal(size=(4, 3))
            rotation, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            shift = rng.normal(size=3) * 5
            model = ClusterModel(4, centroids, {}, [], int(rng.integers(4)), 0.6)
            moved = ClusterModel(4, centroids @ rotation.T + shift, {}, [], model.expert_cluster, 0.6)
            query = rng.normal(size=3)
            verdict, margin = predict_expert(model, query)
            moved_verdict, moved_margin = predict_expert(moved, rotation @ query + shift)
            self.assertEqual(verdict, moved_verdict)
            self.assertAlmostEqual(margin, moved_margin, places=9)

    def test_dimension_checked(self):
        with self.assertRaises(ClusteringError):
            predict_expert(two_centroid_model(), [1, 2, 3])

    def test_raw_features_need_transform_log(self):
        developer = SimpleNamespace(developer='dana@acme.io', values={'x': 1, 'y': 1})
        with self.assertRaises(ClusteringError):
            predict_expert(two_centroid_model(), developer)


class IntersectTestCase(SimpleTestCase):
    """Test cases for cross-library expert intersection"""

    def test_shared_expert(self):
        self.assertEqual(intersect_experts({'L1': {'a', 'b'}, 'L2': {'b', 'c'}}), {'b'})

    def test_single_library(self):
        self.assertEqual(intersect_experts({'L1': {'a', 'b'}}), {'a', 'b'})

    def test_disjoint(self):
        self.assertEqual(intersect_experts({'L1': {'a'}, 'L2': {'c'}}), set())

    def test_verdict_maps(self):
        verdicts = {
            'react': {'a': LIKELY_EXPERT, 'b': UNKNOWN},
            'vue': {'a': LIKELY_EXPERT, 'b': LIKELY_EXPERT},
        }
        self.assertEqual(intersect_experts(verdicts), {'a'})

    def test_intersection_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'experts.intersection.csv'
            write_intersection({'zoe@x.io', 'amy@x.io'}, path)
            self.assertEqual(path.read_text(), 'developer\namy@x.io\nzoe@x.io\n')
            write_intersection(set(), path)
            self.assertEqual(path.read_text(), 'developer\n')


class ModelDocumentTestCase(SimpleTestCase):
    """Test cases for clusters.json and verdicts.csv"""

    def setUp(self):
        self.log = TransformLog(
            columns=['x', 'y'],
            skewed={'y': 0.0},
            standardization={'x': {'mean': 1.0, 'std': 2.0}, 'y': {'mean': 0.0, 'std': 1.0}},
            active=['x', 'y'],
        )
        self.model = ClusterModel(
            k=2,
            centroids=np.array([[0.0, 0.0], [3.0, 2.5]]),
            assignment={'b@x.io': 1, 'a@x.io': 0},
            composition=[
                {'cluster': 0, 'members': 1, 'labelled': 1, 'novice': 1.0, 'intermediate': 0.0, 'expert': 0.0},
                {'cluster': 1, 'members': 1, 'labelled': 1, 'novice': 0.0, 'intermediate': 0.0, 'expert': 1.0},
            ],
            expert_cluster=1,
            threshold_used=0.7,
            inertia=0.0,
            selection_trace=[{'k': 2, 'best_expert_fraction': 1.0}],
            transform_log=self.log,
        )

    def test_reload(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'clusters.json'
            dump_model(self.model, path, library='react')
            loaded = load_model(path)
        np.testing.assert_array_equal(loaded.centroids, self.model.centroids)
        self.assertEqual(loaded.assignment, self.model.assignment)
        self.assertEqual(loaded.expert_cluster, 1)
        self.assertEqual(loaded.transform_log, self.log)
        self.assertEqual(loaded.ranked(), [1, 0])

        developer = SimpleNamespace(developer='c@x.io', values={'x': 7, 'y': np.e ** 2.5 - 1})
        verdict, _ = predict_expert(loaded, developer)
        self.assertEqual(verdict, LIKELY_EXPERT)

    def test_expert_cluster_listed_first(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'clusters.json'
            dump_model(self.model, path, library='react')
            text = path.read_text()
        self.assertLess(text.index('"C1"'), text.index('"C2"'))

    def test_invalid_document(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'clusters.json'
            path.write_text('{"k": 2}')
            with self.assertRaises(ClusteringError):
                load_model(path)

    def test_verdicts_reload(self):
        rows = [
            {'developer': 'a@x.io', 'library': 'react', 'verdict': UNKNOWN, 'distance_margin': -1.25},
            {'developer': 'b@x.io', 'library': 'react', 'verdict': LIKELY_EXPERT, 'distance_margin': 0.1},
        ]
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'verdicts.csv'
            write_verdicts(rows, path)
            self.assertEqual(read_verdicts(path), rows)
