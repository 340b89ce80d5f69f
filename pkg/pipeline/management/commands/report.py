import json
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from libexpert.exceptions import ConfigurationError
from pipeline.commands import INPUT_ERROR, configure_verbosity, ensure_ledger
from pipeline.config import load_config
from pipeline.models import PipelineRun
from pipeline.runner import MANIFEST, STAGES


class Command(BaseCommand):
    help = "List recorded pipeline runs; with --config or --output, summarize that output directory"

    def add_arguments(self, parser):
        parser.add_argument('--config', help="Pipeline configuration whose output to summarize")
        parser.add_argument('--output', help="Output directory to summarize")
        parser.add_argument('--limit', type=int, default=10, help="Ledger entries to list")

    def handle(self, *args, **options):
        configure_verbosity(options.get('verbosity'))
        ensure_ledger()
        output = options['output']
        if options['config']:
            try:
                output = output or load_config(options['config']).output
            except ConfigurationError as e:
                raise CommandError(str(e), returncode=INPUT_ERROR) from e

        runs = PipelineRun.objects.all()
        if output:
            runs = runs.filter(output_dir=str(output))
        for run in runs[:options['limit']]:
            line = f"#{run.pk} {run.started_at:%Y-%m-%d %H:%M:%S} {run.status:<9} {run.output_dir}"
            if run.failed_stage:
                line += f" (failed at {run.failed_stage}: {run.error_message})"
            self.stdout.write(line)
            if run.completed_stages:
                self.stdout.write(f"    stages: {', '.join(run.completed_stages)}")

        if output:
            self.summarize(Path(output))

    def summarize(self, output):
        path = output / MANIFEST
        if not path.exists():
            raise CommandError(f"No manifest in {output}", returncode=INPUT_ERROR)
        with open(path) as f:
            manifest = json.load(f)

        self.stdout.write(f"\n{output} (seed {manifest.get('seed')})")
        for stage in STAGES:
            if stage in manifest['stages']:
                status = f"{len(manifest['stages'][stage]['artifacts'])} artifacts"
            elif stage in manifest['skipped']:
                status = f"skipped ({manifest['skipped'][stage]})"
            else:
                status = 'not run'
            self.stdout.write(f"  {stage:<11} {status}")

        for lib in manifest['config']['libraries']:
            summary_path = output / lib['id'] / 'summary.json'
            if summary_path.exists():
                with open(summary_path) as f:
                    summary = json.load(f)
                self.stdout.write(
                    f"  {lib['id']}: {summary['client_projects']} client projects, "
                    f"{summary['candidate_experts']} candidate experts, "
                    f"{summary['single_project_share']:.0%} in a single project, "
                    f"at most {summary['max_projects']} projects"
                )
            clusters_path = output / lib['id'] / 'clusters.json'
            if clusters_path.exists():
                with open(clusters_path) as f:
                    clusters = json.load(f)
                expert = next(entry for entry in clusters['clusters'] if entry['index'] == clusters['expert_cluster'])
                self.stdout.write(
                    f"  {lib['id']}: k={clusters['k']}, expert cluster {expert['label']} "
                    f"holds {expert['expert']:.0%} experts"
                )
