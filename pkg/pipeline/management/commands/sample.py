import pandas as pd

from features.summary import survey_sample
from features.tables import read_features
from libexpert.exceptions import ConfigurationError
from pipeline.commands import PipelineCommand
from pipeline.seeding import substream


class Command(PipelineCommand):
    help = "Draw a seeded uniform sample of candidate experts to survey; writes survey_sample.csv"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--fraction', type=float, default=1.0, help="Share of candidates per library, in (0, 1]")

    def run_command(self, config, options):
        if config.seed is None:
            raise ConfigurationError("sample needs a seed (--seed or the configuration's seed)")
        fraction = options['fraction']
        if not 0 < fraction <= 1:
            raise ConfigurationError(f"--fraction must be in (0, 1], got {fraction}")

        rows = []
        for lib in config.libraries:
            path = config.output / lib.id / 'features.csv'
            if not path.exists():
                raise ConfigurationError(f"sample needs {path}; run the features stage first")
            chosen = survey_sample(read_features(path), fraction, substream(config.seed, lib.id, 'sample'))
            rows += [{'developer': developer, 'library': lib.id} for developer in chosen]

        path = config.output / 'survey_sample.csv'
        pd.DataFrame(rows, columns=['developer', 'library']).to_csv(path, index=False, lineterminator='\n')
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} developers written to {path}"))
