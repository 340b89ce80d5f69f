from libexpert.exceptions import LibExpertError


class SamplingError(LibExpertError):
    """SMOTE cannot synthesize rows for the given minority class"""


class FoldError(LibExpertError):
    """Labels cannot be split into the requested stratified folds"""


class TrainingError(LibExpertError):
    """A classifier cannot be fitted or used"""
