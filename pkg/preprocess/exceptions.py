from libexpert.exceptions import LibExpertError


class PreprocessError(LibExpertError):
    """A cleaning step cannot run on the given matrix"""
