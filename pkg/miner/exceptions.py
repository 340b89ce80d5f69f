from libexpert.exceptions import LibExpertError


class MiningError(LibExpertError):
    """A repository history cannot be walked; fatal for that project only"""


class EventFormatError(LibExpertError):
    """events.csv does not match the CommitEvent schema"""
