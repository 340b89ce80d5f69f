"""
FeatureMatrix and the TransformLog that replays its cleaning on unseen developers.
"""
import json
from dataclasses import dataclass, field, replace

import numpy as np

from features.records import FEATURE_NAMES, is_missing
from .exceptions import PreprocessError


@dataclass
class TransformLog:
    """Everything the cleaning steps decided, in application order"""

    columns: list = field(default_factory=list)
    imputation: dict = field(default_factory=dict)
    correlation: dict = field(default_factory=dict)
    dropped: list = field(default_factory=list)
    skewed: dict = field(default_factory=dict)
    standardization: dict = field(default_factory=dict)
    active: list = field(default_factory=list)

    def to_dict(self):
        return {
            'columns': list(self.columns),
            'imputation': self.imputation,
            'correlation': self.correlation,
            'dropped': list(self.dropped),
            'skewed': self.skewed,
            'standardization': self.standardization,
            'active': list(self.active),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**{key: data[key] for key in cls.__dataclass_fields__})
        except (KeyError, TypeError) as e:
            raise PreprocessError(f"Invalid transform log: {e}") from e

    def dump(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                return cls.from_dict(json.load(f))
        except (OSError, json.JSONDecodeError) as e:
            raise PreprocessError(f"Cannot read transform log {path}: {e}") from e

    def _impute(self, values):
        values = dict(values)
        for name, rule in self.imputation.items():
            if not is_missing(values.get(name)):
                continue
            if rule['rule'] == 'constant':
                values[name] = rule['value']
            elif rule['rule'] == 'by_imports':
                values[name] = rule['no_imports'] if values['imports'] == 0 else rule['some_imports']
            elif rule['rule'] == 'max':
                values[name] = rule['value']
        return values

    def apply(self, vector, standardize=True):
        """
        Replay the logged cleaning on one developer

        Args:
            vector: FeatureVector, or a dict of raw feature values
            standardize: also apply the stored standardization

        Returns:
            numpy array over the active columns
        """
        values = self._impute(vector if isinstance(vector, dict) else vector.values)

        row = []
        for name in self.active:
            value = values[name]
            if is_missing(value):
                raise PreprocessError(f"{name} is missing and has no imputation rule")
            value = float(value)
            if name in self.skewed:
                # unseen values below the fitted minimum clip to the bottom of the scale
                value = float(np.log1p(max(value - self.skewed[name], 0.0)))
            if standardize and self.standardization:
                params = self.standardization[name]
                value = value - params['mean']
                if params['std'] > 0:
                    value = value / params['std']
            row.append(value)
        return np.asarray(row, dtype=float)


@dataclass
class FeatureMatrix:
    """
    Developers by features, with MISSING stored as NaN

    `columns` are every column the matrix was built with; `active` is the
    ordered subset that survived pruning.
    """

    library: str
    developers: tuple
    columns: tuple
    values: np.ndarray
    active: tuple = ()
    log: TransformLog = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.developers), len(self.columns)):
            raise PreprocessError(
                f"Matrix shape {self.values.shape} does not match "
                f"{len(self.developers)} developers x {len(self.columns)} columns"
            )
        if not self.active:
            self.active = tuple(self.columns)
        if self.log is None:
            self.log = TransformLog(columns=list(self.columns), active=list(self.active))

    @classmethod
    def from_vectors(cls, vectors, library=''):
        developers = tuple(vector.developer for vector in vectors)
        values = [
            [np.nan if is_missing(vector[name]) else float(vector[name]) for name in FEATURE_NAMES]
            for vector in vectors
        ]
        return cls(
            library=library or (vectors[0].library if vectors else ''),
            developers=developers,
            columns=FEATURE_NAMES,
            values=np.asarray(values, dtype=float).reshape(len(developers), len(FEATURE_NAMES)),
        )

    def column(self, name):
        return self.values[:, self.columns.index(name)]

    def active_values(self):
        return self.values[:, [self.columns.index(name) for name in self.active]]

    def has_missing(self):
        return bool(np.isnan(self.values).any())

    def evolve(self, **changes):
        return replace(self, **changes)

    def rows_for(self, developers):
        index = {developer: row for row, developer in enumerate(self.developers)}
        return [index[developer] for developer in developers]
