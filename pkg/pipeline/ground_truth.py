"""
Ground-truth ingestion: ground_truth.csv with columns developer,library,score.
"""
import logging

import pandas as pd

from learn.labels import GroundTruthLabel
from .exceptions import GroundTruthError

logger = logging.getLogger(__name__)

GROUND_TRUTH_COLUMNS = ['developer', 'library', 'score']


def ingest_ground_truth(path, libraries=None):
    """
    Read and validate survey answers

    Args:
        path: CSV file with header developer,library,score
        libraries: known library ids; rows naming another library are errors

    Returns:
        list of GroundTruthLabel in file order

    Raises:
        GroundTruthError: listing every invalid row with its line number
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise GroundTruthError(f"Cannot read ground truth {path}: {e}") from e

    if list(frame.columns) != GROUND_TRUTH_COLUMNS:
        raise GroundTruthError(f"{path}: header must be {','.join(GROUND_TRUTH_COLUMNS)}")

    known = set(libraries) if libraries is not None else None
    labels = []
    errors = []
    seen = {}
    for line, row in enumerate(frame.to_dict('records'), start=2):
        developer, library, score = row['developer'].strip(), row['library'].strip(), row['score'].strip()
        if not developer:
            errors.append((line, "empty developer"))
            continue
        if known is not None and library not in known:
            errors.append((line, f"unknown library {library!r}"))
            continue
        try:
            value = int(score)
        except ValueError:
            errors.append((line, f"score {score!r} is not an integer"))
            continue
        if not 1 <= value <= 5:
            errors.append((line, f"score {value} outside 1-5"))
            continue
        key = (developer, library)
        if key in seen:
            errors.append((line, f"duplicate answer for {developer} in {library} (first on line {seen[key]})"))
            continue
        seen[key] = line
        labels.append(GroundTruthLabel(developer=developer, library=library, score=value))

    if errors:
        details = '; '.join(f"line {line}: {message}" for line, message in errors)
        raise GroundTruthError(f"{path}: {len(errors)} invalid row(s): {details}", row_errors=errors)

    logger.info(f"Loaded {len(labels)} ground-truth labels from {path}")
    return labels


def labels_for(labels, library):
    """{developer: GroundTruthLabel} of one library"""
    return {label.developer: label for label in labels if label.library == library}
