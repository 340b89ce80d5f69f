from pipeline.commands import PipelineCommand


class Command(PipelineCommand):
    help = "Walk client-project histories and write events.csv"
    stages = ('mine',)
