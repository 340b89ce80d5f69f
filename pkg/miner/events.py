"""events.csv reading and writing"""
from datetime import timezone

import pandas as pd

from .exceptions import EventFormatError
from .records import CommitEvent

EVENT_COLUMNS = [
    'developer', 'project', 'commit', 'authored_at',
    'churn_total', 'churn_client', 'touched_client_file', 'imports_added',
]

TIMESTAMP_FORMAT = '%Y-%m-%dT%H:%M:%SZ'


def events_frame(events):
    rows = [
        {
            'developer': event.developer,
            'project': event.project,
            'commit': event.commit_id,
            'authored_at': event.authored_at.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT),
            'churn_total': event.churn_total,
            'churn_client': event.churn_client,
            'touched_client_file': 'true' if event.touched_client_file else 'false',
            'imports_added': event.imports_added,
        }
        for event in events
    ]
    return pd.DataFrame(rows, columns=EVENT_COLUMNS)


def write_events(events, path):
    events_frame(events).to_csv(path, index=False, lineterminator='\n')


def read_events(path):
    """Load events.csv back into CommitEvent records"""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError) as e:
        raise EventFormatError(f"Cannot read events {path}: {e}") from e

    if list(frame.columns) != EVENT_COLUMNS:
        raise EventFormatError(f"{path}: expected columns {','.join(EVENT_COLUMNS)}")

    events = []
    for index, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            events.append(CommitEvent(
                developer=row.developer,
                project=row.project,
                commit_id=row.commit,
                authored_at=pd.Timestamp(row.authored_at).tz_convert('UTC').to_pydatetime(),
                churn_total=int(row.churn_total),
                churn_client=int(row.churn_client),
                touched_client_file={'true': True, 'false': False}[row.touched_client_file],
                imports_added=int(row.imports_added),
            ))
        except (KeyError, ValueError, TypeError) as e:
            raise EventFormatError(f"{path}:{index}: invalid event row ({e})") from e
    return events
