"""features.clean.csv: developer plus the active columns, after cleaning"""
import pandas as pd

from .exceptions import PreprocessError
from .records import FeatureMatrix


def write_clean(matrix, path):
    frame = pd.DataFrame(matrix.active_values(), columns=list(matrix.active))
    frame.insert(0, 'developer', list(matrix.developers))
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')


def read_clean(path, log, library=''):
    """Reload features.clean.csv; its columns must be the log's active columns"""
    try:
        frame = pd.read_csv(path, dtype={'developer': str}, keep_default_na=False, float_precision='round_trip')
    except (OSError, pd.errors.ParserError) as e:
        raise PreprocessError(f"Cannot read cleaned features {path}: {e}") from e

    expected = ['developer', *log.active]
    if list(frame.columns) != expected:
        raise PreprocessError(f"{path}: expected columns {','.join(expected)}")

    return FeatureMatrix(
        library=library,
        developers=tuple(frame['developer']),
        columns=tuple(log.active),
        values=frame[list(log.active)].to_numpy(dtype=float),
        active=tuple(log.active),
        log=log,
    )
