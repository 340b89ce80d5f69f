from pipeline.commands import PipelineCommand


class Command(PipelineCommand):
    help = "Impute, prune correlated features and transform skewed ones"
    stages = ('preprocess',)
