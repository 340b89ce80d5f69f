import tempfile
from datetime import timedelta
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from features.aggregate import compute_features
from features.records import FEATURE_NAMES, MISSING, FeatureVector
from miner.records import CommitEvent
from pipeline.fixtures import SNAPSHOT
from .exceptions import PreprocessError
from .records import FeatureMatrix, TransformLog
from .steps import (
    clean_features, impute_missing, is_skewed, pearson_matrix, prune_correlated, standardize,
    transform_skewed, unstandardize,
)
from .tables import read_clean, write_clean


def vector(developer, imports=0, commits_import=0, first=MISSING, last=MISSING, between=MISSING,
           avg_import=MISSING, commits=5):
    return FeatureVector(developer, 'react', {
        'commits': commits,
        'commitsClientFiles': 3,
        'commitsImportLibrary': commits_import,
        'codeChurn': 50,
        'codeChurnClientFiles': 20,
        'imports': imports,
        'daysSinceFirstImport': first,
        'daysSinceLastImport': last,
        'daysBetweenImports': between,
        'avgDaysCommitsClientFiles': 4,
        'avgDaysCommitsImportLibrary': avg_import,
        'projects': 1,
        'projectsImport': 1 if imports else 0,
    })


def matrix_of(columns, developers=None):
    names = tuple(columns)
    values = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
    developers = developers or tuple(f"dev{i}" for i in range(values.shape[0]))
    return FeatureMatrix(library='react', developers=tuple(developers), columns=names, values=values)


def random_vectors(seed, count=40):
    rng = np.random.default_rng(seed)
    vectors = []
    for d in range(count):
        events = []
        for n in range(int(rng.integers(1, 15))):
            touched = n == 0 or bool(rng.random() < 0.7)
            churn = int(rng.lognormal(2, 1.2))
            events.append(CommitEvent(
                developer=f"dev{d:02d}@example.com",
                project=f"owner/p{int(rng.integers(0, 4))}",
                commit_id=f"{d:02d}{n:038x}",
                authored_at=SNAPSHOT - timedelta(seconds=int(rng.integers(0, 500 * 86400))),
                churn_total=churn,
                churn_client=int(rng.integers(0, churn + 1)) if touched else 0,
                touched_client_file=touched,
                imports_added=int(rng.integers(1, 4)) if touched and rng.random() < 0.4 else 0,
            ))
        vectors.append(compute_features(events, SNAPSHOT, 'react'))
    return vectors


class ImputationTestCase(SimpleTestCase):
    """Test cases for the missing-value rules"""

    def setUp(self):
        self.matrix = FeatureMatrix.from_vectors([
            vector('none'),
            vector('one', imports=1, commits_import=1, first=5, last=5, between=0),
            vector('three', imports=3, commits_import=2, first=40, last=10, between=30, avg_import=30),
            vector('two', imports=2, commits_import=2, first=20, last=8, between=12, avg_import=12),
        ], library='react')
        self.imputed = impute_missing(self.matrix)

    def cell(self, developer, name):
        return self.imputed.column(name)[self.imputed.developers.index(developer)]

    def test_no_imports(self):
        self.assertEqual(self.cell('none', 'daysSinceFirstImport'), 0)
        self.assertEqual(self.cell('none', 'daysSinceLastImport'), 0)
        self.assertEqual(self.cell('none', 'daysBetweenImports'), -1)
        self.assertEqual(self.cell('none', 'avgDaysCommitsImportLibrary'), 30)

    def test_single_import_commit(self):
        self.assertEqual(self.cell('one', 'daysBetweenImports'), 0)
        self.assertEqual(self.cell('one', 'daysSinceFirstImport'), 5)
        self.assertEqual(self.cell('one', 'avgDaysCommitsImportLibrary'), 30)

    def test_observed_values_untouched(self):
        self.assertEqual(self.cell('three', 'daysBetweenImports'), 30)
        self.assertEqual(self.cell('two', 'avgDaysCommitsImportLibrary'), 12)

    def test_no_missing_left_and_rules_logged(self):
        self.assertFalse(self.imputed.has_missing())
        self.assertTrue(self.matrix.has_missing())
        self.assertEqual(self.imputed.log.imputation['avgDaysCommitsImportLibrary'], {'rule': 'max', 'value': 30.0})
        self.assertEqual(self.imputed.log.imputation['daysBetweenImports']['no_imports'], -1)

    def test_all_missing_average_rejected(self):
        matrix = FeatureMatrix.from_vectors([vector('a'), vector('b')])
        with self.assertRaises(PreprocessError):
            impute_missing(matrix)


class PruningTestCase(SimpleTestCase):
    """Test cases for correlation pruning"""

    def setUp(self):
        self.matrix = matrix_of({
            'A': [1, 2, 3, 4, 5, 6],
            'B': [1, 2, 4, 3, 5, 6],
            'C': [1, 1, 1, 2, 2, 2],
        })

    def test_pearson_values(self):
        r = pearson_matrix(self.matrix.values)
        self.assertAlmostEqual(r[0, 1], 16.5 / 17.5)
        self.assertAlmostEqual(r[0, 2], 4.5 / np.sqrt(17.5 * 1.5))
        self.assertAlmostEqual(r[1, 2], 3.5 / np.sqrt(17.5 * 1.5))

    def test_drops_member_with_higher_mean_correlation(self):
        pruned, dropped = prune_correlated(self.matrix, threshold=0.7)
        self.assertEqual(pruned.active, ('B', 'C'))
        self.assertEqual([name for name, _ in dropped], ['A'])
        self.assertEqual(pruned.log.dropped[0]['feature'], 'A')
        self.assertEqual(pruned.log.correlation['columns'], ['A', 'B', 'C'])

    def test_tie_drops_later_column(self):
        matrix = matrix_of({'X': [1, 2, 3, 4], 'Y': [2, 4, 6, 8]})
        pruned, _ = prune_correlated(matrix, threshold=0.7)
        self.assertEqual(pruned.active, ('X',))

    def test_constant_column_never_correlates(self):
        matrix = matrix_of({'X': [1, 2, 3, 4], 'K': [5, 5, 5, 5]})
        pruned, dropped = prune_correlated(matrix, threshold=0.7)
        self.assertEqual(dropped, [])
        self.assertEqual(pruned.active, ('X', 'K'))

    def test_no_active_pair_above_threshold(self):
        for seed in range(10):
            matrix = impute_missing(FeatureMatrix.from_vectors(random_vectors(seed)))
            pruned, _ = prune_correlated(matrix, threshold=0.7)
            r = np.abs(pearson_matrix(pruned.active_values()))
            np.fill_diagonal(r, 0)
            self.assertLessEqual(r.max(), 0.7)

    def test_missing_values_rejected(self):
        matrix = FeatureMatrix.from_vectors([vector('a'), vector('b', imports=1, commits_import=1, first=1, last=1,
                                                                between=0, avg_import=3)])
        with self.assertRaises(PreprocessError):
            prune_correlated(matrix)

    def test_single_developer_rejected(self):
        with self.assertRaises(PreprocessError):
            prune_correlated(matrix_of({'X': [1], 'Y': [2]}))


class SkewTestCase(SimpleTestCase):
    """Test cases for the skew rule and transform"""

    def test_rule(self):
        self.assertTrue(is_skewed(np.array([1, 2, 3, 4, 50]), ratio=4))
        self.assertFalse(is_skewed(np.array([5, 6, 7, 8, 9]), ratio=4))
        self.assertTrue(is_skewed(np.array([0, 0, 0, 0, 3]), ratio=4))
        self.assertFalse(is_skewed(np.array([-3, -1, 0, 0, 0]), ratio=4))

    def test_transform_clears_rule(self):
        matrix = matrix_of({
            'X': [1, 2, 3, 4, 50],
            'Y': [10, 12, 11, 13, 400],
            'W': [5, 6, 7, 8, 9],
        })
        transformed, names = transform_skewed(matrix, ratio=4)
        self.assertEqual(names, ['X', 'Y'])
        self.assertEqual(transformed.log.skewed, {'X': 1.0, 'Y': 10.0})
        np.testing.assert_allclose(transformed.column('X'), np.log1p([0, 1, 2, 3, 49]))
        np.testing.assert_array_equal(transformed.column('W'), matrix.column('W'))
        for name in names:
            self.assertFalse(is_skewed(transformed.column(name), ratio=4))

    def test_no_imports_sentinel_shifted(self):
        matrix = matrix_of({'daysBetweenImports': [-1, -1, 0, 2, 40]})
        transformed, names = transform_skewed(matrix, ratio=4)
        self.assertEqual(names, ['daysBetweenImports'])
        self.assertEqual(transformed.log.skewed, {'daysBetweenImports': -1.0})
        column = transformed.column('daysBetweenImports')
        self.assertTrue(np.isfinite(column).all())
        np.testing.assert_allclose(column, np.log([1, 1, 2, 4, 42]))

    def test_inactive_columns_untouched(self):
        matrix = matrix_of({'X': [1, 2, 3, 4, 50], 'Y': [1, 2, 3, 4, 50]}).evolve(active=('Y',))
        transformed, names = transform_skewed(matrix, ratio=4)
        self.assertEqual(names, ['Y'])
        np.testing.assert_array_equal(transformed.column('X'), matrix.column('X'))


class StandardizeTestCase(SimpleTestCase):
    """Test cases for standardization"""

    def test_zero_mean_unit_variance(self):
        matrix = matrix_of({'X': [1, 2, 3, 4, 50], 'Y': [3, 1, 4, 1, 5]})
        standardized, params = standardize(matrix)
        np.testing.assert_allclose(standardized.values.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(standardized.values.std(axis=0), 1)
        self.assertEqual(params['Y']['mean'], 2.8)

    def test_constant_column_centered_only(self):
        standardized, params = standardize(matrix_of({'K': [7, 7, 7], 'X': [1, 2, 3]}))
        np.testing.assert_array_equal(standardized.column('K'), [0, 0, 0])
        self.assertEqual(params['K'], {'mean': 7.0, 'std': 0.0})

    def test_unstandardize_restores_values(self):
        matrix = matrix_of({'X': [1, 2, 3, 4, 50], 'K': [7, 7, 7, 7, 7]})
        standardized, params = standardize(matrix)
        np.testing.assert_allclose(unstandardize(standardized, params).values, matrix.values)


class CleanFeaturesTestCase(SimpleTestCase):
    """Test cases for the full cleaning run and its replay"""

    def setUp(self):
        self.vectors = random_vectors(11)
        self.cleaned = clean_features(self.vectors, library='react')

    def test_log_describes_every_step(self):
        log = self.cleaned.log
        self.assertEqual(log.columns, list(FEATURE_NAMES))
        self.assertEqual(log.active, list(self.cleaned.active))
        self.assertEqual(set(log.standardization), set(log.active))
        self.assertEqual(len(log.correlation['matrix']), len(FEATURE_NAMES))
        self.assertEqual(len(log.active) + len(log.dropped), len(FEATURE_NAMES))

    def test_values_not_standardized(self):
        self.assertFalse(np.allclose(self.cleaned.active_values().mean(axis=0), 0))

    def test_replay_matches_fitted_rows(self):
        standardized, _ = standardize(self.cleaned)
        for row, vector in enumerate(self.vectors):
            np.testing.assert_allclose(self.cleaned.log.apply(vector), standardized.active_values()[row], atol=1e-9)
            np.testing.assert_allclose(
                self.cleaned.log.apply(vector, standardize=False), self.cleaned.active_values()[row], atol=1e-9,
            )

    def test_replay_accepts_plain_dicts(self):
        first = self.vectors[0]
        np.testing.assert_array_equal(self.cleaned.log.apply(dict(first.values)), self.cleaned.log.apply(first))

    def test_artifacts_reload(self):
        with tempfile.TemporaryDirectory() as tmp:
            log_path = Path(tmp) / 'transform_log.json'
            clean_path = Path(tmp) / 'features.clean.csv'
            self.cleaned.log.dump(log_path)
            write_clean(self.cleaned, clean_path)

            log = TransformLog.load(log_path)
            self.assertEqual(log.to_dict(), self.cleaned.log.to_dict())
            reloaded = read_clean(clean_path, log, library='react')
            self.assertEqual(reloaded.developers, self.cleaned.developers)
            np.testing.assert_array_equal(reloaded.active_values(), self.cleaned.active_values())

    def test_clean_columns_must_match_log(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.clean.csv'
            path.write_text('developer,commits\nd,1\n')
            with self.assertRaises(PreprocessError):
                read_clean(path, self.cleaned.log)

    def test_empty_input_rejected(self):
        with self.assertRaises(PreprocessError):
            clean_features([], library='react')
