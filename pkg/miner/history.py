"""
History scanning: one CommitEvent per non-merge commit of a client project.
"""
import logging
from datetime import timezone

from django.conf import settings
from git import NULL_TREE
from joblib import Parallel, delayed

from corpus.exceptions import UNREADABLE, RepositoryUnavailable
from corpus.imports import decode_source, detect_client_files, is_source_path, is_vendored
from corpus.records import ScanReport
from .diffs import count_added_imports, line_churn
from .exceptions import MiningError
from .records import AuthorRef, CommitEvent

logger = logging.getLogger(__name__)


def _changes(commit):
    if commit.parents:
        return commit.parents[0].diff(commit, create_patch=True)
    # root commit: every file is new, with the commit on the b side
    return commit.diff(NULL_TREE, create_patch=True)


def _is_client_change(change, lib, extensions, vendored):
    """Client-file status of a changed file: post-image, or pre-image for deletions"""
    blob = change.a_blob if change.deleted_file else change.b_blob
    path = change.a_path if change.deleted_file else change.b_path
    if blob is None or not path or not is_source_path(path, extensions) or is_vendored(path, vendored):
        return False
    text = decode_source(blob.data_stream.read())
    return text is not None and detect_client_files(text, lib)


def _patch_text(change):
    patch = change.diff
    if isinstance(patch, bytes):
        if b'\x00' in patch:
            return ''
        return patch.decode('utf-8', errors='replace')
    return patch or ''


def commit_event(commit, project, lib, resolver):
    """Build the CommitEvent of a single non-merge commit"""
    extensions = set(settings.LIBEXPERT['SOURCE_EXTENSIONS'])
    vendored = set(settings.LIBEXPERT['VENDORED_DIRS'])
    churn_total = churn_client = imports_added = 0
    touched_client_file = False

    for change in _changes(commit):
        added, deleted = line_churn(_patch_text(change))
        churn_total += added + deleted

        if _is_client_change(change, lib, extensions, vendored):
            touched_client_file = True
            churn_client += added + deleted
            imports_added += count_added_imports(_patch_text(change), lib)

    author = AuthorRef(commit.author.name, commit.author.email, project.repo_id, commit.hexsha)
    return CommitEvent(
        developer=resolver.account_for(author),
        project=project.repo_id,
        commit_id=commit.hexsha,
        authored_at=commit.authored_datetime.astimezone(timezone.utc),
        churn_total=churn_total,
        churn_client=churn_client,
        touched_client_file=touched_client_file,
        imports_added=imports_added,
    )


def scan_history(project, lib, resolver, repo, report=None):
    """
    Walk a client project's history up to its snapshot head

    Args:
        project: ClientProject
        lib: LibrarySpec
        resolver: IdentityResolver shared across projects
        repo: git.Repo of the project
        report: ScanReport for per-commit failures

    Returns:
        list of CommitEvent ordered by (authored_at, commit_id)

    Raises:
        MiningError: when the history itself cannot be walked
    """
    report = report if report is not None else ScanReport()
    try:
        commits = list(repo.iter_commits(project.head_snapshot.commit))
    except UNREADABLE as e:
        raise MiningError(f"{project.repo_id}: cannot walk history ({e})") from e

    events = []
    for commit in commits:
        try:
            if len(commit.parents) > 1:
                continue
            events.append(commit_event(commit, project, lib, resolver))
        except UNREADABLE as e:
            report.record('miner', f"{project.repo_id}@{commit.hexsha[:12]}", f"unreadable object: {e}")

    events.sort(key=lambda event: (event.authored_at, event.commit_id))
    logger.info(f"{project.repo_id}: {len(events)} commit events")
    return events


def _scan_project(project, lib, resolver, source):
    report = ScanReport()
    try:
        repo = source.open(project.repo_id)
        try:
            events = scan_history(project, lib, resolver, repo, report)
        finally:
            repo.close()
    except (MiningError, RepositoryUnavailable) as e:
        report.record('miner', project.repo_id, e)
        events = []
    return events, report


def mine_projects(projects, lib, resolver, source, report=None, jobs=None):
    """
    Scan every client project and merge the events deterministically

    Returns:
        list of CommitEvent ordered by (project, authored_at, commit_id)
    """
    report = report if report is not None else ScanReport()
    jobs = jobs or settings.LIBEXPERT['JOBS']
    projects = sorted(projects, key=lambda project: project.repo_id)

    results = Parallel(n_jobs=jobs, prefer='threads')(
        delayed(_scan_project)(project, lib, resolver, source) for project in projects
    )

    events = []
    for project_events, scan_report in results:
        report.merge(scan_report)
        events.extend(project_events)
    return events
