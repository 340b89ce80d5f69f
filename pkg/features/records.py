from dataclasses import dataclass, field

# Table column order; every artifact with feature columns follows it
FEATURE_NAMES = (
    # volume
    'commits',
    'commitsClientFiles',
    'commitsImportLibrary',
    'codeChurn',
    'codeChurnClientFiles',
    'imports',
    # frequency
    'daysSinceFirstImport',
    'daysSinceLastImport',
    'daysBetweenImports',
    'avgDaysCommitsClientFiles',
    'avgDaysCommitsImportLibrary',
    # breadth
    'projects',
    'projectsImport',
)

# Features that may be MISSING before imputation
MISSABLE = (
    'daysSinceFirstImport',
    'daysSinceLastImport',
    'daysBetweenImports',
    'avgDaysCommitsImportLibrary',
)

MISSING = None


def is_missing(value):
    return value is MISSING


@dataclass(frozen=True)
class FeatureVector:
    """Expertise features of one developer for one library"""

    developer: str
    library: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.values) ^ set(FEATURE_NAMES)
        if unknown:
            raise ValueError(f"{self.developer}: feature set mismatch {sorted(unknown)}")
        for name, value in self.values.items():
            if is_missing(value) and name not in MISSABLE:
                raise ValueError(f"{self.developer}: {name} cannot be missing")
        v = self.values
        if not v['commitsImportLibrary'] <= v['commitsClientFiles'] <= v['commits']:
            raise ValueError(f"{self.developer}: commit counts out of order")
        if v['codeChurnClientFiles'] > v['codeChurn'] or v['projectsImport'] > v['projects']:
            raise ValueError(f"{self.developer}: client totals exceed overall totals")
        if v['imports'] < v['commitsImportLibrary']:
            raise ValueError(f"{self.developer}: fewer imports than import-adding commits")
        first, last = v['daysSinceFirstImport'], v['daysSinceLastImport']
        if not is_missing(first) and not (first >= last >= 0):
            raise ValueError(f"{self.developer}: import day features out of order")

    def __getitem__(self, name):
        return self.values[name]

    def as_row(self):
        return {'developer': self.developer, 'library': self.library,
                **{name: self.values[name] for name in FEATURE_NAMES}}
