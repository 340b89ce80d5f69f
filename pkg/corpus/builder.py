"""
Corpus construction: find the client projects of a target library among the
candidate repositories, frozen at a snapshot timestamp.
"""
import logging
from datetime import timezone

from django.conf import settings
from joblib import Parallel, delayed

from .exceptions import UNREADABLE, ManifestParseError, RepositoryUnavailable, UnsupportedManifestError
from .imports import decode_source, detect_client_files, is_source_path
from .manifests import parse_manifest
from .records import ClientProject, HeadSnapshot, ScanReport

logger = logging.getLogger(__name__)


def head_at(repo, snapshot):
    """
    Latest commit of HEAD whose commit time is not after the snapshot

    Returns:
        HeadSnapshot, or None for an empty repository or one without history
        before the snapshot
    """
    if not repo.head.is_valid():
        return None
    commit = next(repo.iter_commits('HEAD', max_count=1, until=snapshot.isoformat()), None)
    if commit is None:
        return None
    return HeadSnapshot(commit=commit.hexsha, timestamp=commit.committed_datetime.astimezone(timezone.utc))


def _blobs(tree):
    vendored = set(settings.LIBEXPERT['VENDORED_DIRS'])
    return tree.traverse(
        predicate=lambda item, depth: item.type == 'blob',
        prune=lambda item, depth: item.type == 'tree' and item.name in vendored,
    )


def scan_repository(repo_id, repo, lib, snapshot, report):
    """
    Inspect one repository at the snapshot

    Returns:
        ClientProject when a manifest declares the library, otherwise None
    """
    head = head_at(repo, snapshot)
    if head is None:
        report.record('corpus', repo_id, 'no commits at or before the snapshot')
        return None

    tree = repo.commit(head.commit).tree
    manifest_files = set(settings.LIBEXPERT['MANIFEST_FILES'])
    extensions = set(settings.LIBEXPERT['SOURCE_EXTENSIONS'])

    evidence = []
    sources = []
    for blob in _blobs(tree):
        if blob.name in manifest_files:
            try:
                found = parse_manifest(blob.data_stream.read(), lib, path=blob.path)
            except (ManifestParseError, UnsupportedManifestError) as e:
                report.record('corpus', f"{repo_id}:{blob.path}", e)
                continue
            if found:
                evidence.append(found)
        elif is_source_path(blob.path, extensions):
            sources.append(blob)

    if not evidence:
        return None

    client_files = []
    for blob in sources:
        text = decode_source(blob.data_stream.read())
        if text is not None and detect_client_files(text, lib):
            client_files.append(blob.path)

    logger.info(f"{repo_id} is a {lib.id} client: {len(client_files)} client files")
    return ClientProject(
        repo_id=repo_id,
        manifest_evidence=tuple(sorted(evidence, key=lambda e: e.path)),
        client_files=tuple(client_files),
        head_snapshot=head,
    )


def _scan(source, repo_id, lib, snapshot):
    report = ScanReport()
    try:
        repo = source.open(repo_id)
        try:
            project = scan_repository(repo_id, repo, lib, snapshot, report)
        finally:
            repo.close()
    except (RepositoryUnavailable, *UNREADABLE) as e:
        report.record('corpus', repo_id, f"unreachable: {e}")
        project = None
    return project, report


def build_corpus(repo_ids, lib, snapshot, source, report=None, jobs=None):
    """
    Build the client-project corpus of a library

    Args:
        repo_ids: Candidate repository ids (owner/name or directory names)
        lib: LibrarySpec of the target library
        snapshot: Aware datetime the corpus is frozen at
        source: RepoSource able to open every id
        report: ScanReport collecting per-repository errors
        jobs: joblib worker count (threads)

    Returns:
        list of ClientProject sorted by repo_id
    """
    report = report if report is not None else ScanReport()
    jobs = jobs or settings.LIBEXPERT['JOBS']
    repo_ids = sorted(set(repo_ids))
    if lib.repo_slug in repo_ids:
        logger.debug(f"Skipping {lib.repo_slug}, the repository of {lib.id}")
        repo_ids.remove(lib.repo_slug)
    if not repo_ids:
        return []

    results = Parallel(n_jobs=jobs, prefer='threads')(
        delayed(_scan)(source, repo_id, lib, snapshot) for repo_id in repo_ids
    )

    corpus = []
    for project, scan_report in results:
        report.merge(scan_report)
        if project is not None:
            corpus.append(project)

    logger.info(f"{lib.id}: {len(corpus)} client projects among {len(repo_ids)} repositories")
    return sorted(corpus, key=lambda project: project.repo_id)
