"""features.csv reading and writing; MISSING is an empty cell"""
import pandas as pd

from .exceptions import FeatureFormatError
from .records import FEATURE_NAMES, MISSING, FeatureVector

FEATURE_COLUMNS = ['developer', 'library', *FEATURE_NAMES]


def feature_frame(vectors):
    return pd.DataFrame([vector.as_row() for vector in vectors], columns=FEATURE_COLUMNS, dtype=object)


def write_features(vectors, path):
    feature_frame(vectors).to_csv(path, index=False, na_rep='', lineterminator='\n')


def _number(cell):
    if cell == '':
        return MISSING
    value = float(cell)
    return int(value) if value.is_integer() and '.' not in cell else value


def read_features(path):
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError) as e:
        raise FeatureFormatError(f"Cannot read features {path}: {e}") from e

    if list(frame.columns) != FEATURE_COLUMNS:
        raise FeatureFormatError(f"{path}: expected columns {','.join(FEATURE_COLUMNS)}")

    vectors = []
    for line, row in enumerate(frame.to_dict('records'), start=2):
        try:
            vectors.append(FeatureVector(
                developer=row['developer'],
                library=row['library'],
                values={name: _number(row[name]) for name in FEATURE_NAMES},
            ))
        except ValueError as e:
            raise FeatureFormatError(f"{path}:{line}: {e}") from e
    return vectors
