"""
Identity resolvers: map commit authors to a canonical developer account
"""
import logging
import threading
from abc import ABC, abstractmethod
from collections import defaultdict

from corpus.exceptions import ApiError
from libexpert.exceptions import ConfigurationError
from .records import AuthorRef, DeveloperIdentity

logger = logging.getLogger(__name__)


def normalize_email(email):
    return (email or '').strip().lower()


class IdentityResolver(ABC):
    """Abstract base class for identity resolvers; the cache is shared by all scan workers"""

    def __init__(self, report=None):
        self.report = report
        self._cache = {}
        self._lock = threading.Lock()

    def account_for(self, author):
        """Canonical account id of an AuthorRef; one answer per email for the resolver's lifetime"""
        email = normalize_email(author.email)
        with self._lock:
            if email not in self._cache:
                self._cache[email] = self.lookup(author, email)
            return self._cache[email]

    @abstractmethod
    def lookup(self, author, email):
        """Resolve an author not seen before"""
        pass


class EmailResolver(IdentityResolver):
    """Offline resolver: two authors are the same developer iff they share an email"""

    def lookup(self, author, email):
        return email


class RemoteAccountResolver(IdentityResolver):
    """Maps authors through the hosting platform's commit-to-account attribution"""

    def __init__(self, client, report=None):
        super().__init__(report=report)
        self.client = client

    def lookup(self, author, email):
        if not (author.project and author.commit):
            return email
        try:
            login = self.client.commit_author_login(author.project, author.commit)
        except ApiError as e:
            if self.report is not None:
                self.report.record('identity', email, f"remote lookup failed, using email identity: {e}")
            return email
        if not login:
            logger.debug(f"{email} has no hosting account; using email identity")
            return email
        return login


def resolve_identities(authors, resolver):
    """
    Resolve a list of authors to developer identities

    Args:
        authors: iterable of AuthorRef or (name, email) pairs
        resolver: IdentityResolver

    Returns:
        dict: normalized email -> DeveloperIdentity; emails sharing an account share the identity
    """
    names = {}
    accounts = {}
    for author in authors:
        if not hasattr(author, 'project'):
            author = AuthorRef(*author)
        email = normalize_email(author.email)
        names.setdefault(email, author.name or '')
        accounts[email] = resolver.account_for(author)

    emails_by_account = defaultdict(set)
    for email, account in accounts.items():
        emails_by_account[account].add(email)

    identities = {}
    for account, emails in emails_by_account.items():
        identity = DeveloperIdentity(
            account_id=account,
            emails=frozenset(emails),
            display_name=names[min(emails)],
        )
        for email in emails:
            identities[email] = identity
    return identities


def get_identity_resolver(mode, report=None, client=None):
    """Factory function to get the configured identity resolver"""
    if mode == 'offline':
        return EmailResolver(report=report)
    if mode == 'remote':
        if client is None:
            from corpus.hosting import HostingApiClient
            client = HostingApiClient()
        if not client.token:
            raise ConfigurationError("Remote identity resolution requires LIBEXPERT_API_TOKEN")
        return RemoteAccountResolver(client, report=report)
    raise ConfigurationError(f"Unsupported identity resolver: {mode}")
