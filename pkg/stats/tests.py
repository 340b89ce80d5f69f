from itertools import combinations

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from cluster.selection import ClusterModel
from preprocess.records import FeatureMatrix
from .effects import HIGHER, SIMILAR, closest_median_comparison, quintile_expert_fractions, quintile_table
from .exceptions import StatisticsError
from .nonparametric import LARGE, NEGLIGIBLE, cliffs_delta, magnitude, mann_whitney_u


def pairwise_u(x, y):
    return sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in x for b in y)


def enumerated_p(x, y):
    """Two-sided p over every split of the pooled values into groups of |x| and |y|"""
    pooled = list(x) + list(y)
    observed = pairwise_u(x, y)
    values = []
    for chosen in combinations(range(len(pooled)), len(x)):
        group = [pooled[i] for i in chosen]
        rest = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        values.append(pairwise_u(group, rest))
    below = sum(value <= observed for value in values)
    above = sum(value >= observed for value in values)
    return min(1.0, 2 * min(below, above) / len(values))


def enumerated_delta(x, y):
    score = 0
    for a in x:
        for b in y:
            score += (a > b) - (a < b)
    return score / (len(x) * len(y))


def random_pairs(count, seed=20180430):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        x = rng.integers(0, 6, size=int(rng.integers(1, 7))).tolist()
        y = rng.integers(0, 6, size=int(rng.integers(1, 7))).tolist()
        yield x, y


class MannWhitneyTestCase(SimpleTestCase):
    """Test cases for the Mann-Whitney U test"""

    def test_total_dominance(self):
        u, _ = mann_whitney_u([1, 2], [3, 4])
        self.assertEqual(u, 0.0)

    def test_identical_singletons(self):
        self.assertEqual(mann_whitney_u([1], [1]), (0.5, 1.0))

    def test_matches_enumeration(self):
        for x, y in random_pairs(500):
            u, p = mann_whitney_u(x, y)
            self.assertEqual(u, pairwise_u(x, y))
            self.assertAlmostEqual(p, enumerated_p(x, y), delta=1e-9)

    def test_complement_and_symmetry(self):
        for x, y in random_pairs(500, seed=1):
            u_x, p_xy = mann_whitney_u(x, y)
            u_y, p_yx = mann_whitney_u(y, x)
            self.assertEqual(u_x + u_y, len(x) * len(y))
            self.assertAlmostEqual(p_xy, p_yx, delta=1e-12)

    def test_normal_approximation_stays_close(self):
        # continuous draws are tie-free
        rng = np.random.default_rng(2)
        for _ in range(200):
            x, y = rng.normal(size=6), rng.normal(size=6) + rng.normal()
            _, exact = mann_whitney_u(x, y)
            _, approximate = mann_whitney_u(x, y, exact_limit=0)
            self.assertAlmostEqual(exact, approximate, delta=0.02)

    def test_constant_samples_use_no_variance(self):
        self.assertEqual(mann_whitney_u([3] * 10, [3] * 10, exact_limit=0)[1], 1.0)

    def test_empty_sample(self):
        with self.assertRaises(StatisticsError):
            mann_whitney_u([], [1])


class CliffsDeltaTestCase(SimpleTestCase):
    """Test cases for Cliff's delta"""

    def test_matches_enumeration(self):
        for x, y in random_pairs(500, seed=3):
            d, _ = cliffs_delta(x, y)
            self.assertEqual(d, enumerated_delta(x, y))

    def test_antisymmetric(self):
        for x, y in random_pairs(500, seed=4):
            self.assertEqual(cliffs_delta(x, y)[0], -cliffs_delta(y, x)[0])

    def test_magnitude_bands(self):
        self.assertEqual(magnitude(0.1), NEGLIGIBLE)
        self.assertEqual(magnitude(-0.2), 'small')
        self.assertEqual(magnitude(0.4), 'medium')
        self.assertEqual(magnitude(-0.474), LARGE)
        self.assertEqual(cliffs_delta([5, 6], [1, 2]), (1.0, LARGE))


class ClosestMedianTestCase(SimpleTestCase):
    """Test cases for the expert-cluster comparison"""

    def setUp(self):
        developers = [f"dev{i:02d}@example.com" for i in range(90)]
        clusters = [0] * 30 + [1] * 30 + [2] * 30
        client_commits = list(range(40, 70)) + list(range(1, 31)) + list(range(100, 130))
        breadth = list(range(30)) * 3
        self.matrix = FeatureMatrix(
            library='react',
            developers=tuple(developers),
            columns=('commitsClientFiles', 'projects'),
            values=np.column_stack([client_commits, breadth]),
        )
        self.model = ClusterModel(
            k=3,
            centroids=np.zeros((3, 2)),
            assignment=dict(zip(developers, clusters)),
            composition=[
                {'cluster': 0, 'members': 30, 'labelled': 30, 'novice': 0.1, 'intermediate': 0.0, 'expert': 0.9},
                {'cluster': 1, 'members': 30, 'labelled': 30, 'novice': 0.9, 'intermediate': 0.0, 'expert': 0.1},
                {'cluster': 2, 'members': 30, 'labelled': 30, 'novice': 0.8, 'intermediate': 0.0, 'expert': 0.2},
            ],
            expert_cluster=0,
            threshold_used=0.6,
        )

    def test_planted_effect(self):
        report = closest_median_comparison(self.model, self.matrix, library='react')
        self.assertEqual(report.expert_cluster, 'C1')
        entry = report.entry('commitsClientFiles')
        self.assertEqual(entry['comparison_cluster'], 'C3')
        self.assertEqual(entry['delta'], 1.0)
        self.assertEqual(entry['magnitude'], LARGE)
        self.assertEqual(entry['direction'], HIGHER)
        self.assertLess(entry['p_value'], 0.001)

    def test_identical_distributions(self):
        entry = closest_median_comparison(self.model, self.matrix).entry('projects')
        self.assertEqual(entry['direction'], SIMILAR)
        self.assertEqual(entry['delta'], 0.0)
        self.assertEqual(entry['magnitude'], NEGLIGIBLE)
        # equal medians and sizes: the lower index wins
        self.assertEqual(entry['comparison_cluster'], 'C3')

    def test_tiny_expert_cluster_skipped(self):
        assignment = dict(self.model.assignment)
        for developer in list(assignment)[1:30]:
            assignment[developer] = 1
        self.model.assignment = assignment
        report = closest_median_comparison(self.model, self.matrix)
        self.assertEqual(report.entries, [])
        self.assertEqual({skipped['feature'] for skipped in report.skipped}, {'commitsClientFiles', 'projects'})

    def test_single_cluster_rejected(self):
        self.model.k = 1
        with self.assertRaises(StatisticsError):
            closest_median_comparison(self.model, self.matrix)


class QuintileTestCase(SimpleTestCase):
    """Test cases for expert shares by feature quintile"""

    def test_experts_at_the_top(self):
        labels = ['novice'] * 8 + ['expert'] * 2
        result = quintile_expert_fractions(range(1, 11), labels)
        self.assertEqual(result['fractions'], [0.0, 0.0, 0.0, 0.0, 1.0])
        self.assertEqual(result['boundaries'], [2.0, 4.0, 6.0, 8.0])
        self.assertFalse(result['degenerate'])

    def test_uniform_experts(self):
        rng = np.random.default_rng(5)
        values = rng.random(2000)
        labels = np.where(rng.random(2000) < 0.4, 'expert', 'novice').tolist()
        overall = labels.count('expert') / len(labels)
        for fraction in quintile_expert_fractions(values, labels)['fractions']:
            self.assertAlmostEqual(fraction, overall, delta=0.1)

    def test_conservation(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            size = int(rng.integers(5, 80))
            values = rng.integers(0, 10, size=size)
            labels = rng.choice(['novice', 'intermediate', 'expert'], size=size).tolist()
            result = quintile_expert_fractions(values, labels)
            weighted = sum(c * f for c, f in zip(result['counts'], result['fractions'])) / size
            self.assertAlmostEqual(weighted, labels.count('expert') / size, places=12)
            self.assertEqual(sum(result['counts']), size)

    def test_constant_column_is_degenerate(self):
        result = quintile_expert_fractions([3] * 6, ['expert', 'novice'] * 3)
        self.assertTrue(result['degenerate'])
        self.assertEqual(result['counts'], [6, 0, 0, 0, 0])

    def test_too_few_rows(self):
        with self.assertRaises(StatisticsError):
            quintile_expert_fractions([1, 2, 3], ['expert'] * 3)

    def test_table_layout(self):
        matrix = FeatureMatrix(
            library='react',
            developers=tuple(f"d{i}" for i in range(10)),
            columns=('commits', 'imports'),
            values=np.column_stack([range(10), [0] * 10]),
        )
        labels = {f"d{i}": 'expert' if i >= 8 else 'novice' for i in range(10)}
        table = quintile_table(matrix, labels, library='react')
        self.assertEqual(len(table), 10)
        commits = table[table['feature'] == 'commits']
        self.assertEqual(commits['expert_fraction'].tolist(), [0.0, 0.0, 0.0, 0.0, 1.0])
        self.assertTrue(pd.isna(commits.iloc[0]['lower']))
        self.assertEqual(table[table['feature'] == 'imports']['degenerate'].unique().tolist(), ['true'])
