from pipeline.commands import PipelineCommand
from pipeline.runner import STAGES


class Command(PipelineCommand):
    help = "Run every pipeline stage; --resume skips checkpointed stages"
    stages = STAGES
    config_options = {
        'scheme': 'scheme',
        'classifiers': 'classifiers',
        'k_max': 'k_max',
        'expert_threshold': 'expert_threshold',
    }

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--scheme', choices=['ternary', 'five'])
        parser.add_argument('--classifier', dest='classifiers', action='append', choices=['rf', 'svm', 'zeror'])
        parser.add_argument('--kmax', dest='k_max', type=int)
        parser.add_argument('--threshold', dest='expert_threshold', type=float)
