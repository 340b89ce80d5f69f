from pathlib import Path

from django.core.management.base import CommandError

from cluster.selection import predict_expert
from cluster.serializers import load_model
from features.tables import read_features
from libexpert.exceptions import LibExpertError
from pipeline.commands import INPUT_ERROR, PipelineCommand, configure_verbosity


class Command(PipelineCommand):
    help = (
        "Map every candidate expert to the fitted centroids and write verdicts.csv; "
        "with --model, print the verdict of single developers instead"
    )
    stages = ('predict',)

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--model', help="clusters.json of one library (standalone mode)")
        parser.add_argument('--developer', action='append', default=[], help="Developer to classify; repeatable")
        parser.add_argument('--features', help="features.csv holding the developers; defaults to the model's sibling")
        # standalone mode does not need a configuration
        for action in parser._actions:
            if action.dest == 'config':
                action.required = False

    def handle(self, *args, **options):
        if not options['model']:
            if not options['config']:
                raise CommandError("predict needs --config, or --model with --developer", returncode=INPUT_ERROR)
            return super().handle(*args, **options)

        configure_verbosity(options.get('verbosity'))
        if not options['developer']:
            raise CommandError("--model needs at least one --developer", returncode=INPUT_ERROR)
        model_path = Path(options['model'])
        features_path = Path(options['features']) if options['features'] else model_path.with_name('features.csv')
        try:
            model = load_model(model_path)
            vectors = {vector.developer: vector for vector in read_features(features_path)}
            for developer in options['developer']:
                if developer not in vectors:
                    raise CommandError(f"{developer} is not a candidate expert in {features_path}",
                                       returncode=INPUT_ERROR)
                verdict, margin = predict_expert(model, vectors[developer])
                self.stdout.write(f"{developer}\t{verdict}\t{margin:.6f}")
        except LibExpertError as e:
            raise CommandError(str(e), returncode=INPUT_ERROR) from e
