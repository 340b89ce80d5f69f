from libexpert.exceptions import LibExpertError


class StatisticsError(LibExpertError):
    """A test or summary cannot be computed on the given samples"""
