import math
import shutil
import tempfile
from datetime import timedelta
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from corpus.builder import build_corpus
from corpus.records import LibrarySpec
from corpus.sources import DirectorySource
from miner.history import mine_projects
from miner.records import CommitEvent
from miner.resolvers import EmailResolver
from pipeline.fixtures import SNAPSHOT, build_webapp
from .aggregate import FeatureAccumulator, build_feature_table, compute_features
from .exceptions import CandidateExcluded, ContractViolation, FeatureFormatError
from .records import FEATURE_NAMES, MISSING, FeatureVector
from .summary import candidate_summary, survey_sample
from .tables import read_features, write_features

REACT = LibrarySpec(id='react', manifest_name='react')

GOLDEN = {
    'commits': 3,
    'commitsClientFiles': 2,
    'commitsImportLibrary': 1,
    'codeChurn': 4,
    'codeChurnClientFiles': 3,
    'imports': 1,
    'daysSinceFirstImport': 10,
    'daysSinceLastImport': 10,
    'daysBetweenImports': 0,
    'avgDaysCommitsClientFiles': 20,
    'avgDaysCommitsImportLibrary': MISSING,
    'projects': 1,
    'projectsImport': 1,
}


def event(days_before, touched=True, imports=0, churn=1, client=None, developer='dana@acme.io',
          project='acme/webapp', commit=None):
    client = (churn if touched else 0) if client is None else client
    return CommitEvent(
        developer=developer,
        project=project,
        commit_id=commit or f"{developer}-{project}-{days_before}",
        authored_at=SNAPSHOT - timedelta(days=days_before),
        churn_total=churn,
        churn_client=client,
        touched_client_file=touched,
        imports_added=imports,
    )


def random_history(rng, developer='dev@example.com'):
    """Events of one developer with at least one client-file commit"""
    events = []
    for n in range(int(rng.integers(1, 13))):
        touched = n == 0 or bool(rng.random() < 0.6)
        churn = int(rng.integers(0, 50))
        events.append(CommitEvent(
            developer=developer,
            project=f"owner/p{int(rng.integers(0, 3))}",
            commit_id=f"{n:040x}",
            authored_at=SNAPSHOT - timedelta(seconds=int(rng.integers(0, 400 * 86400))),
            churn_total=churn,
            churn_client=int(rng.integers(0, churn + 1)) if touched else 0,
            touched_client_file=touched,
            imports_added=int(rng.integers(0, 4)) if touched and rng.random() < 0.5 else 0,
        ))
    return events


class ComputeFeaturesTestCase(SimpleTestCase):
    """Test cases for per-developer feature aggregation"""

    def test_hand_computed_example(self):
        events = [
            event(30, touched=True, churn=1),
            event(10, touched=True, imports=1, churn=2),
            event(0, touched=False, churn=1),
        ]
        vector = compute_features(events, SNAPSHOT, library='react')
        self.assertEqual(vector.values, GOLDEN)

    def test_no_imports_leaves_import_days_missing(self):
        vector = compute_features([event(5), event(2)], SNAPSHOT)
        for name in ('daysSinceFirstImport', 'daysSinceLastImport', 'daysBetweenImports',
                     'avgDaysCommitsImportLibrary'):
            self.assertIs(vector[name], MISSING)
        self.assertEqual(vector['avgDaysCommitsClientFiles'], 3)

    def test_import_gaps(self):
        events = [event(40, imports=2), event(25, imports=1), event(10, imports=1)]
        vector = compute_features(events, SNAPSHOT)
        self.assertEqual(vector['daysSinceFirstImport'], 40)
        self.assertEqual(vector['daysSinceLastImport'], 10)
        self.assertEqual(vector['daysBetweenImports'], 30)
        self.assertEqual(vector['avgDaysCommitsImportLibrary'], 15)
        self.assertEqual(vector['imports'], 4)

    def test_single_client_commit_has_zero_average_gap(self):
        self.assertEqual(compute_features([event(3)], SNAPSHOT)['avgDaysCommitsClientFiles'], 0)

    def test_partial_days_floor(self):
        late = CommitEvent('d', 'p', 'c', SNAPSHOT - timedelta(hours=47), 1, 1, True, 1)
        self.assertEqual(compute_features([late], SNAPSHOT)['daysSinceFirstImport'], 1)

    def test_breadth(self):
        events = [event(9, project='a/one', imports=1), event(8, project='a/two'), event(7, project='a/three')]
        vector = compute_features(events, SNAPSHOT)
        self.assertEqual((vector['projects'], vector['projectsImport']), (3, 1))

    def test_mixed_developers_rejected(self):
        with self.assertRaises(ContractViolation):
            compute_features([event(3), event(2, developer='other@acme.io')], SNAPSHOT)

    def test_events_after_snapshot_rejected(self):
        with self.assertRaises(ContractViolation):
            compute_features([event(-1)], SNAPSHOT)

    def test_candidate_gate(self):
        with self.assertRaises(CandidateExcluded) as ctx:
            compute_features([event(3, touched=False)], SNAPSHOT)
        self.assertEqual(ctx.exception.reason_code, 'no-client-file-commits')

    def test_vector_rejects_broken_ordering(self):
        values = dict(GOLDEN, commitsClientFiles=5)
        with self.assertRaises(ValueError):
            FeatureVector('dana@acme.io', 'react', values)


class RandomizedHistoryTestCase(SimpleTestCase):
    """Properties over 50 seeded random histories"""

    def setUp(self):
        rng = np.random.default_rng(20180430)
        self.histories = [random_history(rng) for _ in range(50)]
        self.rng = np.random.default_rng(7)

    def test_ordering_invariants(self):
        for events in self.histories:
            v = compute_features(events, SNAPSHOT)
            self.assertLessEqual(v['commitsImportLibrary'], v['commitsClientFiles'])
            self.assertLessEqual(v['commitsClientFiles'], v['commits'])
            self.assertLessEqual(v['codeChurnClientFiles'], v['codeChurn'])
            self.assertLessEqual(v['projectsImport'], v['projects'])
            self.assertGreaterEqual(v['imports'], v['commitsImportLibrary'])
            if v['daysSinceFirstImport'] is not MISSING:
                self.assertGreaterEqual(v['daysSinceFirstImport'], v['daysSinceLastImport'])
                self.assertGreaterEqual(v['daysSinceLastImport'], 0)

    def test_permutation_invariant(self):
        for events in self.histories:
            shuffled = [events[i] for i in self.rng.permutation(len(events))]
            self.assertEqual(compute_features(shuffled, SNAPSHOT), compute_features(events, SNAPSHOT))

    def test_chunked_merge_matches_single_pass(self):
        for events in self.histories:
            cut = int(self.rng.integers(0, len(events) + 1))
            left = FeatureAccumulator()
            for e in events[:cut]:
                left.add(e)
            right = FeatureAccumulator()
            for e in events[cut:]:
                right.add(e)
            merged = left.merge(right).finalize('', SNAPSHOT)
            self.assertEqual(merged, compute_features(events, SNAPSHOT))


class FeatureTableTestCase(SimpleTestCase):
    """Test cases for the feature table of a library"""

    def test_exclusions_reported(self):
        events = [event(3), event(2, touched=False, developer='docs@acme.io')]
        vectors, exclusions = build_feature_table(events, SNAPSHOT, 'react')
        self.assertEqual([v.developer for v in vectors], ['dana@acme.io'])
        self.assertEqual(exclusions, [('docs@acme.io', 'no-client-file-commits')])

    def test_parallel_matches_serial(self):
        rng = np.random.default_rng(3)
        events = [e for i in range(10) for e in random_history(rng, developer=f"dev{i}@example.com")]
        self.assertEqual(
            build_feature_table(events, SNAPSHOT, 'react', jobs=1),
            build_feature_table(events, SNAPSHOT, 'react', jobs=4),
        )

    def test_csv_keeps_missing_markers(self):
        vectors, _ = build_feature_table(
            [event(30), event(10, imports=1, churn=2), event(0, touched=False), event(4, developer='a@x.io')],
            SNAPSHOT, 'react',
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            write_features(vectors, path)
            header, first = path.read_text().splitlines()[:2]
            self.assertEqual(header.split(','), ['developer', 'library', *FEATURE_NAMES])
            self.assertTrue(first.startswith('a@x.io,react,1,1,0,1,1,0,,,,0,,1,0'))
            self.assertEqual(read_features(path), vectors)

    def test_bad_feature_row(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            path.write_text(','.join(['developer', 'library', *FEATURE_NAMES]) + '\n'
                            + 'd,react,1,2,0,1,1,0,,,,0,,1,0\n')
            with self.assertRaises(FeatureFormatError):
                read_features(path)


class GoldenFixtureTestCase(SimpleTestCase):
    """The bundled fixture repository yields the hand-computed vector"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = Path(tempfile.mkdtemp())
        build_webapp(cls.tmp)
        source = DirectorySource(cls.tmp)
        cls.corpus = build_corpus(source.list_repos(), REACT, SNAPSHOT, source)
        cls.events = mine_projects(cls.corpus, REACT, EmailResolver(), source)

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)
        super().tearDownClass()

    def test_golden_vector(self):
        vectors, _ = build_feature_table(self.events, SNAPSHOT, 'react')
        dana = next(vector for vector in vectors if vector.developer == 'dana@acme.io')
        self.assertEqual(dana.values, GOLDEN)
        self.assertEqual(dana.library, 'react')

    def test_candidate_summary(self):
        vectors, _ = build_feature_table(self.events, SNAPSHOT, 'react')
        summary = candidate_summary('react', self.corpus, vectors)
        self.assertEqual(summary['client_projects'], 1)
        self.assertEqual(summary['candidate_experts'], 2)
        self.assertEqual(summary['single_project_share'], 1.0)
        self.assertEqual(summary['max_projects'], 1)


class SurveySampleTestCase(SimpleTestCase):
    """Test cases for the survey sample"""

    def setUp(self):
        self.vectors = [
            compute_features([event(3, developer=f"dev{i:02d}@example.com")], SNAPSHOT, 'react')
            for i in range(18)
        ]

    def test_sample_size_rounds_up(self):
        sample = survey_sample(self.vectors, 0.25, np.random.default_rng(1))
        self.assertEqual(len(sample), math.ceil(0.25 * 18))
        self.assertEqual(sample, sorted(set(sample)))

    def test_full_survey(self):
        sample = survey_sample(self.vectors, 1.0, np.random.default_rng(1))
        self.assertEqual(sample, sorted(v.developer for v in self.vectors))

    def test_seeded(self):
        first = survey_sample(self.vectors, 0.5, np.random.default_rng(9))
        again = survey_sample(self.vectors, 0.5, np.random.default_rng(9))
        self.assertEqual(first, again)

    def test_fraction_range(self):
        with self.assertRaises(ValueError):
            survey_sample(self.vectors, 0, np.random.default_rng(1))
