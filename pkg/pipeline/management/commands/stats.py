from pipeline.commands import PipelineCommand


class Command(PipelineCommand):
    help = "Compare the expert cluster with its closest-median neighbour and write quintiles"
    stages = ('stats',)
