from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from pipeline.commands import INPUT_ERROR
from pipeline.fixtures import build_fixture_corpus


class Command(BaseCommand):
    help = "Build the bundled fixture corpus: git repositories, ground truth and a pipeline configuration"

    def add_arguments(self, parser):
        parser.add_argument('directory', help="Empty or missing directory to build into")
        parser.add_argument('--seed', type=int, default=7, help="Seed of the scripted developer activity")

    def handle(self, *args, **options):
        directory = Path(options['directory'])
        if directory.exists() and any(directory.iterdir()):
            raise CommandError(f"{directory} is not empty", returncode=INPUT_ERROR)
        config_path = build_fixture_corpus(directory, seed=options['seed'])
        self.stdout.write(self.style.SUCCESS(f"Fixture corpus ready; run `libexpert run --config {config_path}`"))
