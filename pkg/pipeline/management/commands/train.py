from pipeline.commands import PipelineCommand


class Command(PipelineCommand):
    help = "Cross-validate the configured classifiers and write report.supervised.json"
    stages = ('train',)
    config_options = {'scheme': 'scheme', 'classifiers': 'classifiers'}

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--scheme', choices=['ternary', 'five'], help="Class scheme")
        parser.add_argument('--classifier', dest='classifiers', action='append', choices=['rf', 'svm', 'zeror'],
                            help="Classifier to evaluate; repeat for several")
