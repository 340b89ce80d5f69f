from pipeline.commands import PipelineCommand


class Command(PipelineCommand):
    help = "Aggregate mined events into features.csv and summary.json"
    stages = ('features',)
