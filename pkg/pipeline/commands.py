"""
Shared base for the libexpert management commands.

Exit codes: 0 success, 2 invalid input (configuration, ground truth, missing
artifacts), 3 stage failure with the stage named on standard error.
"""
import logging

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import BaseCommand, CommandError
from django.db import connection

from libexpert.exceptions import ConfigurationError, LibExpertError
from .config import load_config
from .exceptions import GroundTruthError, PipelineStageError
from .models import PipelineRun
from .runner import PipelineRunner

logger = logging.getLogger(__name__)

INPUT_ERROR = 2
STAGE_ERROR = 3


def configure_verbosity(verbosity):
    """--verbosity 2 or 3 turns the libexpert loggers to DEBUG"""
    if verbosity is None or verbosity < 2:
        return
    for name in settings.LOGGING['loggers']:
        logging.getLogger(name).setLevel(logging.DEBUG)


def ensure_ledger():
    """Create the run ledger table on first use"""
    if PipelineRun._meta.db_table not in connection.introspection.table_names():
        call_command('migrate', interactive=False, verbosity=0)


class PipelineCommand(BaseCommand):
    """
    A command that loads the pipeline configuration and runs stages

    Subclasses set `stages` or override `run_command`.
    """

    stages = ()
    # extra options forwarded into the configuration: option dest -> config key
    config_options = {}

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help="Pipeline configuration (YAML)")
        parser.add_argument('--output', help="Output directory")
        parser.add_argument('--snapshot', help="Snapshot timestamp, ISO-8601 UTC")
        parser.add_argument('--seed', type=int, help="Root seed for every stochastic stage")
        parser.add_argument('--ground-truth', dest='ground_truth', help="Survey labels CSV")
        parser.add_argument('--resume', action='store_true', help="Skip stages whose checkpoints are intact")
        parser.add_argument('--no-ledger', dest='ledger', action='store_false',
                            help="Do not record the run in the ledger database")

    def overrides(self, options):
        overrides = {key: options.get(key) for key in ('output', 'snapshot', 'seed', 'ground_truth')}
        for dest, key in self.config_options.items():
            overrides[key] = options.get(dest)
        return overrides

    def load(self, options):
        return load_config(options['config'], overrides=self.overrides(options))

    def runner(self, config, options):
        if options['ledger']:
            ensure_ledger()
        return PipelineRunner(config, resume=options['resume'], ledger=options['ledger'])

    def run_command(self, config, options):
        manifest = self.runner(config, options).run(self.stages)
        for stage in self.stages:
            if stage in manifest['skipped']:
                self.stderr.write(f"{stage} skipped: {manifest['skipped'][stage]}")
            elif stage in manifest['stages']:
                artifacts = ', '.join(manifest['stages'][stage]['artifacts'])
                self.stdout.write(self.style.SUCCESS(f"{stage}: {artifacts}"))

    def handle(self, *args, **options):
        configure_verbosity(options.get('verbosity'))
        try:
            config = self.load(options)
            self.run_command(config, options)
        except PipelineStageError as e:
            raise CommandError(str(e), returncode=STAGE_ERROR) from e
        except (GroundTruthError, ConfigurationError) as e:
            raise CommandError(str(e), returncode=INPUT_ERROR) from e
        except LibExpertError as e:
            raise CommandError(str(e), returncode=STAGE_ERROR) from e
