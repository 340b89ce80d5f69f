"""
Ground-truth labels and the class schemes they are evaluated under.

Classes are integer indexes in scheme order; lower indexes win ties.
"""
from dataclasses import dataclass

TERNARY = 'ternary'
FIVE = 'five'

TERNARY_CLASSES = ('novice', 'intermediate', 'expert')

CLASS_NAMES = {
    TERNARY: ('Novice', 'Intermediate', 'Expert'),
    FIVE: ('Novice 1', 'Novice 2', 'Intermediate', 'Expert 4', 'Expert 5'),
}


def ternary_of(score):
    if score in (1, 2):
        return 'novice'
    if score == 3:
        return 'intermediate'
    if score in (4, 5):
        return 'expert'
    raise ValueError(f"Score must be in 1..5, got {score!r}")


@dataclass(frozen=True)
class GroundTruthLabel:
    """Self-reported expertise of one developer in one library"""

    developer: str
    library: str
    score: int

    def __post_init__(self):
        ternary_of(self.score)

    @property
    def ternary(self):
        return ternary_of(self.score)

    def class_index(self, scheme):
        if scheme == TERNARY:
            return TERNARY_CLASSES.index(self.ternary)
        if scheme == FIVE:
            return self.score - 1
        raise ValueError(f"Unknown class scheme: {scheme}")


def class_names(scheme):
    try:
        return CLASS_NAMES[scheme]
    except KeyError:
        raise ValueError(f"Unknown class scheme: {scheme}") from None
