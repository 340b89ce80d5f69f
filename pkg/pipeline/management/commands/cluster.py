from pipeline.commands import PipelineCommand


class Command(PipelineCommand):
    help = "Fit k-means for k = 2..kmax and select the expert cluster"
    stages = ('cluster',)
    config_options = {'k_max': 'k_max', 'expert_threshold': 'expert_threshold'}

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--kmax', dest='k_max', type=int, help="Largest k to try")
        parser.add_argument('--threshold', dest='expert_threshold', type=float,
                            help="Expert-fraction threshold; derived from the base rate by default")
