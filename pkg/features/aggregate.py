"""
Aggregation of commit events into per-developer feature vectors.

Day arithmetic is whole UTC days, floor(seconds / 86400).
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field

from django.conf import settings
from joblib import Parallel, delayed

from .exceptions import CandidateExcluded, ContractViolation
from .records import MISSING, FeatureVector

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400

NO_CLIENT_FILE_COMMITS = 'no-client-file-commits'


def whole_days(earlier, later):
    return int((later - earlier).total_seconds() // SECONDS_PER_DAY)


def mean_gap(times):
    """Mean whole-day gap between consecutive timestamps, None for fewer than two"""
    times = sorted(times)
    if len(times) < 2:
        return None
    gaps = [whole_days(a, b) for a, b in zip(times, times[1:])]
    return sum(gaps) / len(gaps)


@dataclass
class FeatureAccumulator:
    """
    Partial aggregate of one developer's events

    Accumulators built over disjoint chunks of an event list merge into the
    same result as a single pass over the whole list.
    """

    developer: str = None
    commits: int = 0
    commits_client: int = 0
    commits_import: int = 0
    churn: int = 0
    churn_client: int = 0
    imports: int = 0
    client_times: list = field(default_factory=list)
    import_times: list = field(default_factory=list)
    projects: set = field(default_factory=set)
    import_projects: set = field(default_factory=set)

    def _claim(self, developer):
        if self.developer is None:
            self.developer = developer
        elif developer is not None and developer != self.developer:
            raise ContractViolation(
                f"Events of {developer} mixed into the aggregate of {self.developer}"
            )

    def add(self, event):
        self._claim(event.developer)
        self.commits += 1
        self.churn += event.churn_total
        self.projects.add(event.project)
        if event.touched_client_file:
            self.commits_client += 1
            self.churn_client += event.churn_client
            self.client_times.append(event.authored_at)
        if event.imports_added:
            self.commits_import += 1
            self.imports += event.imports_added
            self.import_times.append(event.authored_at)
            self.import_projects.add(event.project)
        return self

    def merge(self, other):
        self._claim(other.developer)
        self.commits += other.commits
        self.commits_client += other.commits_client
        self.commits_import += other.commits_import
        self.churn += other.churn
        self.churn_client += other.churn_client
        self.imports += other.imports
        self.client_times.extend(other.client_times)
        self.import_times.extend(other.import_times)
        self.projects |= other.projects
        self.import_projects |= other.import_projects
        return self

    def finalize(self, library, snapshot):
        if self.commits_client < 1:
            raise CandidateExcluded(self.developer, NO_CLIENT_FILE_COMMITS)

        if self.import_times:
            first, last = min(self.import_times), max(self.import_times)
            since_first = whole_days(first, snapshot)
            since_last = whole_days(last, snapshot)
            between = whole_days(first, last)
        else:
            since_first = since_last = between = MISSING

        avg_client = mean_gap(self.client_times)
        avg_import = mean_gap(self.import_times)

        return FeatureVector(
            developer=self.developer,
            library=library,
            values={
                'commits': self.commits,
                'commitsClientFiles': self.commits_client,
                'commitsImportLibrary': self.commits_import,
                'codeChurn': self.churn,
                'codeChurnClientFiles': self.churn_client,
                'imports': self.imports,
                'daysSinceFirstImport': since_first,
                'daysSinceLastImport': since_last,
                'daysBetweenImports': between,
                'avgDaysCommitsClientFiles': 0 if avg_client is None else avg_client,
                'avgDaysCommitsImportLibrary': MISSING if avg_import is None else avg_import,
                'projects': len(self.projects),
                'projectsImport': len(self.import_projects),
            },
        )


def compute_features(events, snapshot, library=''):
    """
    Feature vector of one developer

    Args:
        events: CommitEvents of a single developer for a single library
        snapshot: aware datetime the "days since" features are measured to
        library: library id stamped on the vector

    Raises:
        ContractViolation: events of several developers, or events after the snapshot
        CandidateExcluded: no commit touched a client file
    """
    accumulator = FeatureAccumulator()
    for event in events:
        if event.authored_at > snapshot:
            raise ContractViolation(f"Commit {event.commit_id} is after the snapshot {snapshot.isoformat()}")
        accumulator.add(event)
    if accumulator.developer is None:
        raise ContractViolation("No events to aggregate")
    return accumulator.finalize(library, snapshot)


def _developer_features(developer, events, snapshot, library):
    try:
        return compute_features(events, snapshot, library), None
    except CandidateExcluded as e:
        return None, (developer, e.reason_code)


def build_feature_table(events, snapshot, library, jobs=None):
    """
    Feature vectors of every candidate expert in an event list

    Returns:
        (vectors sorted by developer, exclusions as (developer, reason_code) pairs)
    """
    jobs = jobs or settings.LIBEXPERT['JOBS']
    by_developer = defaultdict(list)
    for event in events:
        by_developer[event.developer].append(event)

    developers = sorted(by_developer)
    results = Parallel(n_jobs=jobs, prefer='threads')(
        delayed(_developer_features)(developer, by_developer[developer], snapshot, library)
        for developer in developers
    )

    vectors = [vector for vector, _ in results if vector is not None]
    exclusions = [excluded for _, excluded in results if excluded is not None]
    logger.info(
        f"{library}: {len(vectors)} candidate experts, "
        f"{len(exclusions)} developers without client-file commits"
    )
    return vectors, exclusions
