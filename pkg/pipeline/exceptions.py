from libexpert.exceptions import LibExpertError


class GroundTruthError(LibExpertError):
    """ground_truth.csv holds invalid rows; `row_errors` lists (line, message) pairs"""

    def __init__(self, message, row_errors=()):
        super().__init__(message)
        self.row_errors = list(row_errors)


class PipelineStageError(LibExpertError):
    """A stage failed; completed stages stay checkpointed for --resume"""

    def __init__(self, stage, message):
        super().__init__(f"stage {stage} failed: {message}")
        self.stage = stage
