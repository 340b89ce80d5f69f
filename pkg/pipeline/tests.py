import io
import json
import math
import shutil
import tempfile
import time
from pathlib import Path
from unittest import mock

import pandas as pd
import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from cluster.selection import LIKELY_EXPERT, UNKNOWN
from learn.exceptions import TrainingError
from libexpert.exceptions import ConfigurationError, LibExpertError
from .commands import INPUT_ERROR, STAGE_ERROR
from .config import build_config, load_config
from .exceptions import GroundTruthError, PipelineStageError
from .fixtures import SNAPSHOT, build_fixture_corpus, build_webapp
from .ground_truth import ingest_ground_truth, labels_for
from .models import PipelineRun
from .runner import LABELLED_STAGES, MANIFEST, STAGES, PipelineRunner, run_pipeline
from .seeding import substream, substream_seed

BASE_CONFIG = {
    'libraries': [{'id': 'react', 'manifest_name': 'react'}],
    'repos': {'source': 'directory', 'path': 'repos'},
    'snapshot': '2018-04-30T00:00:00Z',
    'output': 'out',
}

LIBRARY_ARTIFACTS = [
    'corpus.json', 'events.csv', 'features.csv', 'summary.json', 'features.clean.csv', 'transform_log.json',
    'report.supervised.json', 'clusters.json', 'report.effects.json', 'quintiles.csv',
]


def stage_hashes(manifest):
    return {stage: entry['artifacts'] for stage, entry in manifest['stages'].items()}


class ConfigTestCase(SimpleTestCase):
    """Test cases for pipeline configuration"""

    def test_defaults(self):
        config = build_config(BASE_CONFIG, base_dir='/data')
        self.assertEqual(config.snapshot, SNAPSHOT)
        self.assertEqual(config.output, Path('/data/out'))
        self.assertEqual(config.repos['path'], '/data/repos')
        self.assertEqual(config.scheme, 'ternary')
        self.assertEqual(config.classifiers, ['rf', 'svm', 'zeror'])
        self.assertEqual(config.identity, 'offline')
        self.assertIsNone(config.ground_truth)
        self.assertEqual(config.libraries[0].import_patterns, ('react',))

    def test_overrides(self):
        config = build_config(BASE_CONFIG, overrides={'seed': 42, 'output': '/tmp/elsewhere', 'scheme': None})
        self.assertEqual(config.seed, 42)
        self.assertEqual(config.output, Path('/tmp/elsewhere'))
        self.assertEqual(config.scheme, 'ternary')

    def test_ground_truth_needs_seed(self):
        with self.assertRaises(ConfigurationError) as ctx:
            build_config(dict(BASE_CONFIG, ground_truth='gt.csv'))
        self.assertIn('seed', str(ctx.exception))

    def test_invalid_documents(self):
        invalid = [
            dict(BASE_CONFIG, libraries=[{'id': 'react', 'manifest_name': 'react'}] * 2),
            dict(BASE_CONFIG, libraries=[{'id': 'react', 'manifest_name': 're act'}]),
            dict(BASE_CONFIG, repos={'source': 'remote'}),
            dict(BASE_CONFIG, repos={'source': 'list'}),
            dict(BASE_CONFIG, classifiers=['knn']),
            dict(BASE_CONFIG, k_max=1),
            dict(BASE_CONFIG, expert_threshold=1.5),
            dict(BASE_CONFIG, snapshot='yesterday'),
        ]
        for document in invalid:
            with self.subTest(document=document):
                with self.assertRaises(ConfigurationError):
                    build_config(document)

    def test_yaml_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'libexpert.yaml'
            path.write_text(yaml.safe_dump(dict(BASE_CONFIG, seed=3)))
            config = load_config(path)
            self.assertEqual(config.output, Path(tmp) / 'out')
            self.assertEqual(config.to_document()['snapshot'], '2018-04-30T00:00:00Z')

            path.write_text('- just\n- a list\n')
            with self.assertRaises(ConfigurationError):
                load_config(path)
        with self.assertRaises(ConfigurationError):
            load_config(Path(tmp) / 'missing.yaml')


class GroundTruthTestCase(SimpleTestCase):
    """Test cases for ground-truth ingestion"""

    def ingest(self, text, libraries=('react',)):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'ground_truth.csv'
            path.write_text(text)
            return ingest_ground_truth(path, libraries=libraries)

    def test_scores_map_to_classes(self):
        labels = self.ingest('developer,library,score\nalice,react,5\nbob,react,3\n')
        self.assertEqual([label.ternary for label in labels], ['expert', 'intermediate'])
        self.assertEqual(set(labels_for(labels, 'react')), {'alice', 'bob'})

    def test_every_bad_row_reported(self):
        with self.assertRaises(GroundTruthError) as ctx:
            self.ingest(
                'developer,library,score\n'
                'alice,react,5\n'
                'bob,react,3\n'
                'carol,react,7\n'
                'alice,react,4\n'
                'dave,vue,2\n'
                'erin,react,high\n'
            )
        lines = [line for line, _ in ctx.exception.row_errors]
        self.assertEqual(lines, [4, 5, 6, 7])
        self.assertIn('line 4', str(ctx.exception))

    def test_header_checked(self):
        with self.assertRaises(GroundTruthError):
            self.ingest('email,lib,score\nalice,react,5\n')

    def test_missing_file(self):
        with self.assertRaises(GroundTruthError):
            ingest_ground_truth('/nonexistent/ground_truth.csv')


class SeedingTestCase(SimpleTestCase):
    """Test cases for named random substreams"""

    def test_same_names_same_draws(self):
        self.assertEqual(substream(42, 'react', 'cluster').random(5).tolist(),
                         substream(42, 'react', 'cluster').random(5).tolist())

    def test_names_separate_streams(self):
        seeds = {
            substream_seed(42, 'react', 'cluster'),
            substream_seed(42, 'react', 'train', 'rf'),
            substream_seed(42, 'vue', 'cluster'),
            substream_seed(43, 'react', 'cluster'),
        }
        self.assertEqual(len(seeds), 4)


class FixturePipelineTestCase(SimpleTestCase):
    """End-to-end runs over the bundled fixture corpus"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.root = Path(tempfile.mkdtemp())
        cls.config_path = build_fixture_corpus(cls.root / 'fixture')
        cls.config = cls.configure(output='run_a')

        started = time.monotonic()
        cls.manifest = run_pipeline(cls.config, ledger=False)
        cls.duration = time.monotonic() - started
        cls.rerun_manifest = run_pipeline(cls.configure(output='run_b'), ledger=False)

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.root, ignore_errors=True)
        super().tearDownClass()

    @classmethod
    def configure(cls, output, **overrides):
        return load_config(cls.config_path, overrides={'output': str(cls.root / output), **overrides})

    def test_all_artifacts_written(self):
        library = self.config.output / 'react'
        for name in LIBRARY_ARTIFACTS:
            self.assertTrue((library / name).is_file(), name)
        for name in ('verdicts.csv', 'experts.intersection.csv', MANIFEST):
            self.assertTrue((self.config.output / name).is_file(), name)
        self.assertEqual(list(self.manifest['stages']), list(STAGES))
        self.assertEqual(self.manifest['skipped'], {})
        self.assertEqual(self.manifest['seed'], 7)

    def test_same_seed_same_hashes(self):
        self.assertEqual(stage_hashes(self.manifest), stage_hashes(self.rerun_manifest))

    def test_runtime(self):
        self.assertLess(self.duration, 60)

    def test_supervised_report(self):
        report = json.loads((self.config.output / 'react' / 'report.supervised.json').read_text())
        self.assertEqual(report['labelled'], 37)
        self.assertEqual(set(report['classifiers']), {'RForest', 'SVM', 'Baseline'})
        for classifier in report['classifiers'].values():
            self.assertTrue(all(entry['synthetic_in_test'] == 0 for entry in classifier['fold_audit']))

    def test_verdicts_cover_candidates(self):
        features = pd.read_csv(self.config.output / 'react' / 'features.csv')
        verdicts = pd.read_csv(self.config.output / 'verdicts.csv')
        self.assertEqual(sorted(verdicts['developer']), sorted(features['developer']))
        self.assertTrue(verdicts['verdict'].isin([LIKELY_EXPERT, UNKNOWN]).all())
        shared = pd.read_csv(self.config.output / 'experts.intersection.csv')
        self.assertEqual(
            sorted(shared['developer']),
            sorted(verdicts[verdicts['verdict'] == LIKELY_EXPERT]['developer']),
        )

    def test_without_ground_truth(self):
        document = yaml.safe_load(self.config_path.read_text())
        del document['ground_truth']
        document['output'] = str(self.root / 'unlabelled')
        config = build_config(document, base_dir=self.config_path.parent)

        manifest = PipelineRunner(config, ledger=False).run()
        self.assertEqual(list(manifest['stages']), ['corpus', 'mine', 'features', 'preprocess'])
        self.assertEqual(manifest['skipped'], {stage: 'no ground truth' for stage in LABELLED_STAGES})
        self.assertFalse((config.output / 'react' / 'clusters.json').exists())
        self.assertEqual(stage_hashes(manifest)['features'], stage_hashes(self.manifest)['features'])

    def test_resume_after_failure(self):
        config = self.configure(output='resumed')
        with mock.patch('learn.search.run_supervised', side_effect=TrainingError('induced')):
            with self.assertRaises(PipelineStageError) as ctx:
                PipelineRunner(config, ledger=False).run()
        self.assertEqual(ctx.exception.stage, 'train')

        with mock.patch('miner.history.mine_projects', side_effect=AssertionError('re-mined')), \
                mock.patch('corpus.builder.build_corpus', side_effect=AssertionError('re-scanned')):
            manifest = PipelineRunner(config, resume=True, ledger=False).run()
        self.assertEqual(stage_hashes(manifest), stage_hashes(self.manifest))

    def test_resume_refuses_other_configuration(self):
        with self.assertRaises(ConfigurationError):
            PipelineRunner(self.configure(output='run_a', seed=8), resume=True, ledger=False).run(('corpus',))

    def test_unknown_stage(self):
        with self.assertRaises(ConfigurationError):
            PipelineRunner(self.config, ledger=False).run(('deploy',))

    def test_predict_command(self):
        out = io.StringIO()
        call_command('predict', model=str(self.config.output / 'react' / 'clusters.json'),
                     developer=['dana@acme.io'], stdout=out)
        developer, verdict, margin = out.getvalue().strip().split('\t')
        verdicts = pd.read_csv(self.config.output / 'verdicts.csv').set_index('developer')
        self.assertEqual(developer, 'dana@acme.io')
        self.assertEqual(verdict, verdicts.loc['dana@acme.io', 'verdict'])
        self.assertAlmostEqual(float(margin), verdicts.loc['dana@acme.io', 'distance_margin'], places=5)

    def test_predict_unknown_developer(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('predict', model=str(self.config.output / 'react' / 'clusters.json'),
                         developer=['nobody@acme.io'], stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, INPUT_ERROR)

    def test_sample_command(self):
        output = self.root / 'sampled'
        shutil.copytree(self.config.output, output)
        call_command('sample', config=str(self.config_path), output=str(output), fraction=0.5,
                     ledger=False, stdout=io.StringIO())
        sample = pd.read_csv(output / 'survey_sample.csv')
        candidates = pd.read_csv(output / 'react' / 'features.csv')
        self.assertEqual(len(sample), math.ceil(0.5 * len(candidates)))
        self.assertTrue(set(sample['developer']) <= set(candidates['developer']))


class CommandTestCase(SimpleTestCase):
    """Exit codes of the management commands"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.root = Path(tempfile.mkdtemp())
        build_webapp(cls.root / 'repos')
        cls.config_path = cls.root / 'libexpert.yaml'
        cls.config_path.write_text(yaml.safe_dump(dict(BASE_CONFIG, seed=1, ground_truth='ground_truth.csv')))
        (cls.root / 'ground_truth.csv').write_text('developer,library,score\ndana@acme.io,react,4\n')

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.root, ignore_errors=True)
        super().tearDownClass()

    def command(self, name, **options):
        options.setdefault('ledger', False)
        options.setdefault('stdout', io.StringIO())
        options.setdefault('stderr', io.StringIO())
        return call_command(name, **options)

    def test_stage_success(self):
        out = io.StringIO()
        self.command('corpus', config=str(self.config_path), output=str(self.root / 'ok'), stdout=out)
        self.assertIn('corpus: react/corpus.json', out.getvalue())

    def test_missing_configuration(self):
        with self.assertRaises(CommandError) as ctx:
            self.command('run', config=str(self.root / 'missing.yaml'))
        self.assertEqual(ctx.exception.returncode, INPUT_ERROR)

    def test_invalid_ground_truth(self):
        bad = self.root / 'bad_ground_truth.csv'
        bad.write_text('developer,library,score\ncarol,react,7\n')
        with self.assertRaises(CommandError) as ctx:
            self.command('train', config=str(self.config_path), ground_truth=str(bad),
                         output=str(self.root / 'bad'))
        self.assertEqual(ctx.exception.returncode, INPUT_ERROR)
        self.assertIn('line 2', str(ctx.exception))

    def test_missing_artifacts(self):
        with self.assertRaises(CommandError) as ctx:
            self.command('train', config=str(self.config_path), output=str(self.root / 'empty'))
        self.assertEqual(ctx.exception.returncode, INPUT_ERROR)

    def test_stage_failure_names_stage(self):
        with mock.patch('corpus.builder.build_corpus', side_effect=LibExpertError('disk full')):
            with self.assertRaises(CommandError) as ctx:
                self.command('corpus', config=str(self.config_path), output=str(self.root / 'failed'))
        self.assertEqual(ctx.exception.returncode, STAGE_ERROR)
        self.assertIn('stage corpus failed', str(ctx.exception))

    def test_sample_needs_valid_fraction(self):
        with self.assertRaises(CommandError) as ctx:
            self.command('sample', config=str(self.config_path), fraction=1.5)
        self.assertEqual(ctx.exception.returncode, INPUT_ERROR)

    def test_fixture_directory_must_be_empty(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('fixtures', str(self.root), stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, INPUT_ERROR)

    def test_predict_needs_model_or_config(self):
        with self.assertRaises(CommandError) as ctx:
            self.command('predict', developer=['dana@acme.io'])
        self.assertEqual(ctx.exception.returncode, INPUT_ERROR)


class LedgerTestCase(TestCase):
    """Test cases for the PipelineRun ledger"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.root = Path(tempfile.mkdtemp())
        build_webapp(cls.root / 'repos')

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.root, ignore_errors=True)
        super().tearDownClass()

    def config(self, output):
        return build_config(dict(BASE_CONFIG, output=output), base_dir=self.root)

    def test_completed_run(self):
        config = self.config('ledger_ok')
        PipelineRunner(config).run(('corpus', 'mine'))
        run = PipelineRun.objects.get(output_dir=str(config.output))
        self.assertEqual(run.status, 'completed')
        self.assertEqual(run.completed_stages, ['corpus', 'mine'])
        self.assertIn('react/events.csv', run.stage_hashes['mine'])
        self.assertIsNotNone(run.finished_at)

    def test_failed_run(self):
        config = self.config('ledger_failed')
        with mock.patch('miner.history.mine_projects', side_effect=OSError('no space left')):
            with self.assertRaises(PipelineStageError):
                PipelineRunner(config).run(('corpus', 'mine'))
        run = PipelineRun.objects.get(output_dir=str(config.output))
        self.assertEqual(run.status, 'failed')
        self.assertEqual(run.failed_stage, 'mine')
        self.assertEqual(run.completed_stages, ['corpus'])
        self.assertIn('no space left', run.error_message)

    def test_report_command(self):
        config = self.config('ledger_report')
        PipelineRunner(config).run(('corpus', 'mine', 'features'))
        out = io.StringIO()
        call_command('report', output=str(config.output), stdout=out)
        text = out.getvalue()
        self.assertIn('completed', text)
        self.assertIn('stages: corpus, mine, features', text)
        self.assertIn('react: 1 client projects, 2 candidate experts', text)
        self.assertIn('not run', text)
