from pipeline.commands import PipelineCommand


class Command(PipelineCommand):
    help = "Detect client projects of every configured library and write corpus.json"
    stages = ('corpus',)
