from libexpert.exceptions import LibExpertError


class ClusteringError(LibExpertError):
    """k-means or expert-cluster selection cannot run, or a fitted model is misused"""
