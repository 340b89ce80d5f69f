"""
End-to-end pipeline: corpus -> mine -> features -> preprocess -> train ->
cluster -> predict -> stats.

Every stage reads its inputs back from the artifact files of earlier stages,
so any stage can run alone and --resume can skip checkpointed ones.
manifest.json records the configuration, the root seed and the sha256 of
every artifact a stage wrote.
"""
import hashlib
import json
import logging
from pathlib import Path

from django.utils import timezone as django_timezone

from cluster import selection
from cluster.serializers import dump_model, load_model, write_intersection, write_verdicts
from corpus import builder
from corpus.records import ScanReport
from corpus.serializers import dump_corpus, load_corpus
from corpus.sources import get_repo_source
from features import aggregate
from features.summary import candidate_summary
from features.tables import read_features, write_features
from learn import search
from learn.labels import class_names
from libexpert.exceptions import ConfigurationError, LibExpertError
from miner import history
from miner.events import read_events, write_events
from miner.resolvers import get_identity_resolver
from preprocess import steps
from preprocess.records import FeatureMatrix, TransformLog
from preprocess.tables import read_clean, write_clean
from stats import effects
from .exceptions import PipelineStageError
from .ground_truth import ingest_ground_truth, labels_for
from .models import PipelineRun
from .seeding import substream

logger = logging.getLogger(__name__)

STAGES = ('corpus', 'mine', 'features', 'preprocess', 'train', 'cluster', 'predict', 'stats')

# Stages that need ground truth; skipped without it
LABELLED_STAGES = ('train', 'cluster', 'predict', 'stats')

# ScanReport stages each pipeline stage reports under
ISSUE_STAGES = {'corpus': ('corpus',), 'mine': ('miner', 'identity')}

MANIFEST = 'manifest.json'
SCAN_REPORT = 'scan_report.json'


def file_digest(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(path, data):
    with open(path, 'w') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')


def read_json(path):
    with open(path) as f:
        return json.load(f)


class PipelineRunner:
    """
    Runs pipeline stages for every configured library

    Args:
        config: PipelineConfig
        resume: skip stages whose checkpointed artifacts are intact
        source: RepoSource override (tests); built from config.repos otherwise
        client: HostingApiClient for remote sources and identities
        ledger: record the run in the PipelineRun table
    """

    def __init__(self, config, resume=False, source=None, client=None, ledger=True):
        self.config = config
        self.resume = resume
        self.source = source
        self.client = client
        self.ledger = ledger
        self.output = Path(config.output)
        self.report = ScanReport()
        self.manifest = None
        self.run_record = None
        self._labels = None
        self._resolver = None

    # manifest and checkpoints

    def _new_manifest(self):
        return {'config': self.config.to_document(), 'seed': self.config.seed, 'stages': {}, 'skipped': {}}

    def _load_manifest(self):
        path = self.output / MANIFEST
        if path.exists():
            manifest = read_json(path)
            if manifest.get('config') == self.config.to_document():
                return manifest
            if self.resume:
                raise ConfigurationError(f"{path} was written with a different configuration; cannot resume")
        return self._new_manifest()

    def _save_manifest(self):
        write_json(self.output / MANIFEST, self.manifest)

    def checkpointed(self, stage):
        """True when the stage completed earlier and its artifacts are unchanged"""
        entry = self.manifest['stages'].get(stage)
        if not entry:
            return False
        for relative, digest in entry['artifacts'].items():
            path = self.output / relative
            if not path.exists() or file_digest(path) != digest:
                logger.info(f"{stage}: checkpoint {relative} changed; rerunning")
                return False
        return True

    def _record(self, stage, written):
        artifacts = {
            str(Path(path).relative_to(self.output)): file_digest(path)
            for path in sorted(set(written))
        }
        self.manifest['stages'][stage] = {'artifacts': artifacts}
        self.manifest['skipped'].pop(stage, None)
        # later checkpoints were built from the old artifacts
        for later in STAGES[STAGES.index(stage) + 1:]:
            self.manifest['stages'].pop(later, None)
        self._save_manifest()
        if self.run_record is not None:
            self.run_record.mark_stage(stage, artifacts)

    # inputs

    def library_dir(self, lib):
        path = self.output / lib.id
        path.mkdir(parents=True, exist_ok=True)
        return path

    def _require(self, path, stage):
        if not path.exists():
            raise ConfigurationError(f"{stage} needs {path}; run the earlier stages first")
        return path

    def ground_truth(self):
        """Validated ground-truth labels, read once per run"""
        if self._labels is None:
            self._labels = ingest_ground_truth(
                self.config.ground_truth, libraries=[lib.id for lib in self.config.libraries],
            )
        return self._labels

    def _repo_source(self):
        if self.source is None:
            self.source = get_repo_source(self.config.repos, client=self.client)
        return self.source

    def _identity_resolver(self):
        if self._resolver is None:
            self._resolver = get_identity_resolver(self.config.identity, report=self.report, client=self.client)
        return self._resolver

    # stages

    def stage_corpus(self):
        source = self._repo_source()
        repo_ids = source.list_repos()
        written = []
        for lib in self.config.libraries:
            projects = builder.build_corpus(repo_ids, lib, self.config.snapshot, source, self.report)
            path = self.library_dir(lib) / 'corpus.json'
            dump_corpus(projects, path)
            written.append(path)
        return written

    def stage_mine(self):
        source = self._repo_source()
        resolver = self._identity_resolver()
        written = []
        for lib in self.config.libraries:
            directory = self.library_dir(lib)
            projects = load_corpus(self._require(directory / 'corpus.json', 'mine'))
            events = history.mine_projects(projects, lib, resolver, source, self.report)
            kept = [event for event in events if event.authored_at <= self.config.snapshot]
            if len(kept) < len(events):
                logger.info(f"{lib.id}: ignoring {len(events) - len(kept)} commits authored after the snapshot")
            path = directory / 'events.csv'
            write_events(kept, path)
            written.append(path)
        return written

    def stage_features(self):
        written = []
        for lib in self.config.libraries:
            directory = self.library_dir(lib)
            events = read_events(self._require(directory / 'events.csv', 'features'))
            vectors, exclusions = aggregate.build_feature_table(events, self.config.snapshot, lib.id)
            projects = load_corpus(self._require(directory / 'corpus.json', 'features'))

            summary = candidate_summary(lib.id, projects, vectors)
            summary['excluded_developers'] = len(exclusions)
            write_features(vectors, directory / 'features.csv')
            write_json(directory / 'summary.json', summary)
            written += [directory / 'features.csv', directory / 'summary.json']
        return written

    def stage_preprocess(self):
        written = []
        for lib in self.config.libraries:
            directory = self.library_dir(lib)
            vectors = read_features(self._require(directory / 'features.csv', 'preprocess'))
            matrix = steps.clean_features(vectors, library=lib.id)
            write_clean(matrix, directory / 'features.clean.csv')
            matrix.log.dump(directory / 'transform_log.json')
            written += [directory / 'features.clean.csv', directory / 'transform_log.json']
        return written

    def _clean_matrix(self, lib, stage):
        directory = self.library_dir(lib)
        log = TransformLog.load(self._require(directory / 'transform_log.json', stage))
        return read_clean(self._require(directory / 'features.clean.csv', stage), log, library=lib.id)

    def _labelled_rows(self, matrix, lib):
        labels = labels_for(self.ground_truth(), lib.id)
        developers = [developer for developer in matrix.developers if developer in labels]
        missing = len(labels) - len(developers)
        if missing:
            logger.warning(f"{lib.id}: {missing} surveyed developers are not candidate experts")
        return developers, labels

    def stage_train(self):
        written = []
        scheme = self.config.scheme
        for lib in self.config.libraries:
            matrix = self._clean_matrix(lib, 'train')
            developers, labels = self._labelled_rows(matrix, lib)
            rows = matrix.active_values()[matrix.rows_for(developers)]
            classes = [labels[developer].class_index(scheme) for developer in developers]

            document = {'library': lib.id, 'scheme': scheme, 'labelled': len(developers),
                        'class_names': list(class_names(scheme)), 'classifiers': {}}
            for kind in self.config.classifiers:
                grid = {'rf': self.config.forest_grid, 'svm': self.config.svm_grid}.get(kind)
                report = search.run_supervised(
                    kind, rows, classes, scheme, substream(self.config.seed, lib.id, 'train', kind), grid=grid,
                )
                document['classifiers'][report.classifier] = report.to_dict()

            path = self.library_dir(lib) / 'report.supervised.json'
            write_json(path, document)
            written.append(path)
        return written

    def stage_cluster(self):
        written = []
        for lib in self.config.libraries:
            matrix = self._clean_matrix(lib, 'cluster')
            standardized, _ = steps.standardize(matrix)
            developers, labels = self._labelled_rows(matrix, lib)
            rows = standardized.active_values()[matrix.rows_for(developers)]

            model = selection.select_expert_cluster(
                rows,
                [labels[developer].ternary for developer in developers],
                k_max=self.config.k_max,
                rng=substream(self.config.seed, lib.id, 'cluster'),
                threshold=self.config.expert_threshold,
                developers=developers,
                restarts=self.config.kmeans_restarts,
                transform_log=matrix.log,
            )
            path = self.library_dir(lib) / 'clusters.json'
            dump_model(model, path, library=lib.id, columns=matrix.active)
            written.append(path)
        return written

    def stage_predict(self):
        rows = []
        experts = {}
        for lib in self.config.libraries:
            directory = self.library_dir(lib)
            model = load_model(self._require(directory / 'clusters.json', 'predict'))
            vectors = read_features(self._require(directory / 'features.csv', 'predict'))
            verdicts = {}
            for vector in vectors:
                verdict, margin = selection.predict_expert(model, vector)
                verdicts[vector.developer] = verdict
                rows.append({'developer': vector.developer, 'library': lib.id,
                             'verdict': verdict, 'distance_margin': round(margin, 12)})
            experts[lib.id] = verdicts
            flagged = sum(1 for verdict in verdicts.values() if verdict == selection.LIKELY_EXPERT)
            logger.info(f"{lib.id}: {flagged} of {len(vectors)} candidates are likely experts")

        rows.sort(key=lambda row: (row['library'], row['developer']))
        verdict_path = self.output / 'verdicts.csv'
        write_verdicts(rows, verdict_path)

        intersection_path = self.output / 'experts.intersection.csv'
        write_intersection(selection.intersect_experts(experts), intersection_path)
        return [verdict_path, intersection_path]

    def stage_stats(self):
        written = []
        for lib in self.config.libraries:
            directory = self.library_dir(lib)
            model = load_model(self._require(directory / 'clusters.json', 'stats'))
            vectors = read_features(self._require(directory / 'features.csv', 'stats'))
            imputed = steps.impute_missing(FeatureMatrix.from_vectors(vectors, library=lib.id))

            report = effects.closest_median_comparison(model, imputed, library=lib.id)
            write_json(directory / 'report.effects.json', report.to_dict())

            labels = {developer: label.ternary for developer, label in labels_for(self.ground_truth(), lib.id).items()}
            table = effects.quintile_table(imputed, labels, library=lib.id)
            table.to_csv(directory / 'quintiles.csv', index=False, float_format='%.17g', lineterminator='\n')
            written += [directory / 'report.effects.json', directory / 'quintiles.csv']
        return written

    # driver

    def _start_ledger(self):
        if not self.ledger:
            return
        self.run_record = PipelineRun.objects.create(
            output_dir=str(self.output),
            config=self.config.to_document(),
            seed=self.config.seed,
            resumed=self.resume,
        )

    def _finish_ledger(self, status, stage='', message=''):
        if self.run_record is None:
            return
        self.run_record.status = status
        self.run_record.failed_stage = stage
        self.run_record.error_message = message
        self.run_record.finished_at = django_timezone.now()
        self.run_record.save()

    def run(self, stages=STAGES):
        """
        Run the requested stages in pipeline order

        Returns:
            the manifest dict

        Raises:
            PipelineStageError: naming the failed stage; earlier stages stay checkpointed
        """
        unknown = set(stages) - set(STAGES)
        if unknown:
            raise ConfigurationError(f"Unknown stages: {', '.join(sorted(unknown))}")

        self.output.mkdir(parents=True, exist_ok=True)
        self.manifest = self._load_manifest()
        report_path = self.output / SCAN_REPORT
        if report_path.exists():
            self.report = ScanReport.from_dict(read_json(report_path))
        if self.config.ground_truth is not None and set(stages) & set(LABELLED_STAGES):
            self.ground_truth()
        self._start_ledger()

        for stage in [stage for stage in STAGES if stage in stages]:
            if stage in LABELLED_STAGES and self.config.ground_truth is None:
                logger.warning(f"Skipping {stage}: no ground truth configured")
                self.manifest['skipped'][stage] = 'no ground truth'
                self._save_manifest()
                continue
            if self.resume and self.checkpointed(stage):
                logger.info(f"Skipping {stage}: checkpoint intact")
                continue

            logger.info(f"Stage {stage} started")
            self.report.issues = [
                issue for issue in self.report.issues if issue.stage not in ISSUE_STAGES.get(stage, ())
            ]
            try:
                written = getattr(self, f"stage_{stage}")()
            except ConfigurationError as e:
                self._finish_ledger('failed', stage, str(e))
                raise
            except (LibExpertError, ValueError, OSError) as e:
                logger.error(f"Stage {stage} failed: {e}")
                self._finish_ledger('failed', stage, str(e))
                raise PipelineStageError(stage, str(e)) from e
            finally:
                write_json(report_path, self.report.to_dict())

            self._record(stage, written)
            logger.info(f"Stage {stage} completed ({len(written)} artifacts)")

        self._finish_ledger('completed')
        return self.manifest


def run_pipeline(config, resume=False, **kwargs):
    """Run every stage of the pipeline for a configuration"""
    return PipelineRunner(config, resume=resume, **kwargs).run()
