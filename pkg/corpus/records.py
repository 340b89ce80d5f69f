"""
Domain records shared by the mining stages: target libraries, client projects
and the per-item scan report.
"""
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime

from libexpert.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LibrarySpec:
    """A target library: registry name plus the module paths that import it"""

    id: str
    manifest_name: str
    repo_slug: str = ''
    import_patterns: tuple = ()

    def __post_init__(self):
        if not self.manifest_name or any(ch.isspace() for ch in self.manifest_name):
            raise ConfigurationError(f"Invalid manifest name for library {self.id!r}: {self.manifest_name!r}")
        patterns = tuple(self.import_patterns) or (self.manifest_name,)
        if any(not pattern or pattern.endswith('/') for pattern in patterns):
            raise ConfigurationError(f"Invalid import pattern for library {self.id!r}: {patterns!r}")
        object.__setattr__(self, 'import_patterns', patterns)


@dataclass(frozen=True)
class DependencyEvidence:
    """Which manifest file and dependency section declared the library"""

    path: str
    kind: str
    section: str


@dataclass(frozen=True)
class HeadSnapshot:
    commit: str
    timestamp: datetime


@dataclass(frozen=True)
class ClientProject:
    """A repository that declares a dependency on the target library"""

    repo_id: str
    manifest_evidence: tuple
    client_files: tuple
    head_snapshot: HeadSnapshot

    def __post_init__(self):
        if not self.manifest_evidence:
            raise ValueError(f"{self.repo_id} has no manifest evidence and is not a client project")
        object.__setattr__(self, 'manifest_evidence', tuple(self.manifest_evidence))
        object.__setattr__(self, 'client_files', tuple(sorted(set(self.client_files))))


@dataclass(frozen=True)
class ScanIssue:
    stage: str
    subject: str
    message: str


@dataclass
class ScanReport:
    """Per-item failures recorded while a batch keeps going"""

    issues: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, stage, subject, message):
        """Record an issue and log it as a warning"""
        logger.warning(f"[{stage}] {subject}: {message}")
        with self._lock:
            self.issues.append(ScanIssue(stage, subject, str(message)))

    def merge(self, other):
        with self._lock:
            self.issues.extend(other.issues)

    def for_stage(self, stage):
        return [issue for issue in self.issues if issue.stage == stage]

    @classmethod
    def from_dict(cls, data):
        return cls(issues=[ScanIssue(**issue) for issue in data.get('issues', [])])

    def to_dict(self):
        ordered = sorted(self.issues, key=lambda issue: (issue.stage, issue.subject, issue.message))
        return {
            'issue_count': len(ordered),
            'issues': [
                {'stage': issue.stage, 'subject': issue.subject, 'message': issue.message}
                for issue in ordered
            ],
        }
