class LibExpertError(Exception):
    """Base class for every error raised by libexpert"""


class ConfigurationError(LibExpertError):
    """Invalid pipeline configuration or command-line input"""
