from git.exc import GitCommandError
from gitdb.exc import BadName, BadObject

from libexpert.exceptions import LibExpertError

# git object store failures that affect one repository or commit only
UNREADABLE = (BadName, BadObject, GitCommandError, ValueError, OSError)


class ManifestParseError(LibExpertError):
    """Malformed dependency manifest; `offset` is the byte position of the fault"""

    def __init__(self, message, offset):
        super().__init__(message)
        self.offset = offset


class UnsupportedManifestError(LibExpertError):
    """Manifest file format other than package.json / bower.json"""


class RepositoryUnavailable(LibExpertError):
    """Repository cannot be opened or fetched"""


class CorpusFormatError(LibExpertError):
    """corpus.json does not match the ClientProject schema"""


class ApiError(LibExpertError):
    """Code-hosting API answered with an error status"""

    def __init__(self, message, status_code=None):
        super().__init__(message)
        self.status_code = status_code


class RateLimitExceeded(ApiError):
    """Rate limit still exhausted after the retry budget was spent"""
