from libexpert.exceptions import LibExpertError


class ContractViolation(LibExpertError):
    """Events handed to the aggregator break its preconditions"""


class CandidateExcluded(LibExpertError):
    """Developer is not a candidate expert; `reason_code` says why"""

    def __init__(self, developer, reason_code):
        super().__init__(f"{developer} excluded: {reason_code}")
        self.developer = developer
        self.reason_code = reason_code


class FeatureFormatError(LibExpertError):
    """features.csv does not match the feature table schema"""
