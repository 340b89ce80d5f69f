from collections import namedtuple
from dataclasses import dataclass
from datetime import datetime

# A commit author as seen in history; project/commit let remote resolvers look it up
AuthorRef = namedtuple('AuthorRef', ['name', 'email', 'project', 'commit'], defaults=(None, None))


@dataclass(frozen=True)
class DeveloperIdentity:
    account_id: str
    emails: frozenset
    display_name: str = ''

    def __post_init__(self):
        if not self.emails:
            raise ValueError(f"Identity {self.account_id} has no email")


@dataclass(frozen=True)
class CommitEvent:
    """Mined facts of one non-merge commit"""

    developer: str
    project: str
    commit_id: str
    authored_at: datetime
    churn_total: int
    churn_client: int
    touched_client_file: bool
    imports_added: int

    def __post_init__(self):
        if self.churn_client < 0 or self.churn_total < 0 or self.imports_added < 0:
            raise ValueError(f"Negative counts in commit {self.commit_id}")
        if self.churn_client > self.churn_total:
            raise ValueError(f"Client churn exceeds total churn in commit {self.commit_id}")
        if self.imports_added and not self.touched_client_file:
            raise ValueError(f"Commit {self.commit_id} adds imports without touching a client file")
