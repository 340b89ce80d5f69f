"""
Repository source abstraction layer for the different ways a corpus is supplied
"""
import logging
import re
from abc import ABC, abstractmethod
from pathlib import Path

from git import Repo
from git.exc import GitCommandError, InvalidGitRepositoryError, NoSuchPathError

from libexpert.exceptions import ConfigurationError
from .exceptions import RepositoryUnavailable

logger = logging.getLogger(__name__)

REPO_ID_RE = re.compile(r'^[A-Za-z0-9_.-]+/[A-Za-z0-9_.-]+$')


class RepoSource(ABC):
    """Abstract base class for repository sources"""

    @abstractmethod
    def list_repos(self):
        """Return the candidate repository ids"""
        pass

    @abstractmethod
    def path_for(self, repo_id):
        """Local checkout path of a repository"""
        pass

    def open(self, repo_id):
        """Open a repository, raising RepositoryUnavailable when it cannot be read"""
        try:
            return Repo(self.path_for(repo_id))
        except (InvalidGitRepositoryError, NoSuchPathError) as e:
            raise RepositoryUnavailable(f"{repo_id}: not a readable git repository ({e})") from e


class DirectorySource(RepoSource):
    """Directory of checked-out or bare repositories, flat (name/) or nested (owner/name/)"""

    def __init__(self, root):
        self.root = Path(root)

    def list_repos(self):
        if not self.root.is_dir():
            raise ConfigurationError(f"Repository directory does not exist: {self.root}")

        repo_ids = []
        for entry in sorted(self.root.iterdir()):
            if not entry.is_dir():
                continue
            if _is_repository(entry):
                repo_ids.append(entry.name)
                continue
            for nested in sorted(entry.iterdir()):
                if nested.is_dir() and _is_repository(nested):
                    repo_ids.append(f"{entry.name}/{nested.name}")
        return repo_ids

    def path_for(self, repo_id):
        return self.root / repo_id


class ListFileSource(RepoSource):
    """Newline-delimited owner/name list; checkouts live under clone_root/owner/name"""

    clone_url = 'https://github.com/{repo_id}.git'

    def __init__(self, list_file, clone_root, fetch=False):
        self.list_file = Path(list_file)
        self.clone_root = Path(clone_root)
        self.fetch = fetch

    def list_repos(self):
        if not self.list_file.is_file():
            raise ConfigurationError(f"Repository list file does not exist: {self.list_file}")

        repo_ids = []
        for number, line in enumerate(self.list_file.read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if not REPO_ID_RE.match(line):
                raise ConfigurationError(f"{self.list_file}:{number}: expected owner/name, got {line!r}")
            repo_ids.append(line)
        return repo_ids

    def path_for(self, repo_id):
        return self.clone_root / repo_id

    def open(self, repo_id):
        path = self.path_for(repo_id)
        if not path.exists() and self.fetch:
            self._clone(repo_id, path)
        return super().open(repo_id)

    def _clone(self, repo_id, path):
        url = self.clone_url.format(repo_id=repo_id)
        logger.info(f"Cloning {url} into {path}")
        path.parent.mkdir(parents=True, exist_ok=True)
        try:
            Repo.clone_from(url, path, no_checkout=True)
        except GitCommandError as e:
            raise RepositoryUnavailable(f"{repo_id}: clone failed ({e.stderr.strip() if e.stderr else e})") from e


class TopStarredSource(ListFileSource):
    """Most-starred repositories listed through the hosting API, cloned on demand"""

    def __init__(self, client, clone_root, language='JavaScript', limit=1000):
        super().__init__(list_file='', clone_root=clone_root, fetch=True)
        self.client = client
        self.language = language
        self.limit = limit

    def list_repos(self):
        return self.client.top_starred(language=self.language, limit=self.limit)


def _is_repository(path):
    # checked-out (.git inside) or bare (HEAD + objects/)
    return (path / '.git').exists() or ((path / 'HEAD').is_file() and (path / 'objects').is_dir())


def get_repo_source(repo_config, client=None):
    """Factory function to get the appropriate repository source"""
    kind = repo_config.get('source')

    if kind == 'directory':
        return DirectorySource(repo_config['path'])
    if kind == 'list':
        return ListFileSource(
            repo_config['path'],
            repo_config.get('clone_root') or Path(repo_config['path']).parent,
            fetch=repo_config.get('fetch', False),
        )
    if kind == 'remote':
        if client is None:
            from .hosting import HostingApiClient
            client = HostingApiClient()
        if not client.token:
            raise ConfigurationError("Remote repository source requires LIBEXPERT_API_TOKEN")
        return TopStarredSource(
            client,
            repo_config['clone_root'],
            language=repo_config.get('language', 'JavaScript'),
            limit=repo_config.get('limit', 1000),
        )

    raise ConfigurationError(f"Unsupported repository source: {kind}")
