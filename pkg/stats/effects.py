"""
Characterization of the expert cluster: per-feature comparison against the
cluster with the closest median, and expert shares by feature quintile.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from django.conf import settings

from .exceptions import StatisticsError
from .nonparametric import cliffs_delta, mann_whitney_u

logger = logging.getLogger(__name__)

HIGHER = '+'
LOWER = '-'
SIMILAR = '∘'

QUINTILE_COLUMNS = [
    'library', 'feature', 'quintile', 'lower', 'upper', 'members', 'experts', 'expert_fraction', 'degenerate',
]


@dataclass
class EffectSizeReport:
    library: str
    expert_cluster: str
    entries: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def to_dict(self):
        return {
            'library': self.library,
            'expert_cluster': self.expert_cluster,
            'features': self.entries,
            'skipped': self.skipped,
        }

    def entry(self, feature):
        return next(entry for entry in self.entries if entry['feature'] == feature)


def _direction(p, expert_median, other_median, delta, alpha):
    if p >= alpha:
        return SIMILAR
    if expert_median != other_median:
        return HIGHER if expert_median > other_median else LOWER
    if delta:
        return HIGHER if delta > 0 else LOWER
    return SIMILAR


def closest_median_comparison(model, matrix, library='', alpha=None):
    """
    Compare the expert cluster with its closest-median neighbour, per feature

    For every active feature the non-expert cluster whose median is nearest
    the expert cluster's median is chosen (ties: larger cluster, then lower
    index) and both groups are compared with Mann-Whitney and Cliff's delta.

    Args:
        model: ClusterModel with an assignment covering the matrix rows used
        matrix: FeatureMatrix of imputed feature values
        library: library id for the report

    Returns:
        EffectSizeReport
    """
    alpha = settings.LIBEXPERT['ALPHA'] if alpha is None else alpha
    if model.k < 2:
        raise StatisticsError("Effect sizes need at least two clusters")

    labels = {index: f"C{rank}" for rank, index in enumerate(model.ranked(), start=1)}
    rows = [row for row, developer in enumerate(matrix.developers) if developer in model.assignment]
    clusters = np.array([model.assignment[matrix.developers[row]] for row in rows])
    sizes = np.bincount(clusters, minlength=model.k)
    expert = model.expert_cluster
    features = model.transform_log.active if model.transform_log else list(matrix.active)

    report = EffectSizeReport(library=library, expert_cluster=labels[expert])
    for feature in features:
        values = matrix.column(feature)[rows]
        expert_values = values[clusters == expert]
        if len(expert_values) < 2:
            report.skipped.append({'feature': feature, 'reason': f"expert cluster has {len(expert_values)} member(s)"})
            continue

        expert_median = float(np.median(expert_values))
        others = [c for c in range(model.k) if c != expert and sizes[c] > 0]
        if not others:
            report.skipped.append({'feature': feature, 'reason': 'no other non-empty cluster'})
            continue
        medians = {c: float(np.median(values[clusters == c])) for c in others}
        closest = min(others, key=lambda c: (abs(medians[c] - expert_median), -sizes[c], c))

        other_values = values[clusters == closest]
        u, p = mann_whitney_u(expert_values, other_values)
        d, size = cliffs_delta(expert_values, other_values)
        report.entries.append({
            'feature': feature,
            'comparison_cluster': labels[closest],
            'expert_median': expert_median,
            'comparison_median': medians[closest],
            'u': u,
            'p_value': p,
            'delta': d,
            'magnitude': size,
            'direction': _direction(p, expert_median, medians[closest], d, alpha),
        })

    for skipped in report.skipped:
        logger.warning(f"{library}: {skipped['feature']} skipped ({skipped['reason']})")
    return report


def nearest_rank(sorted_values, q):
    return sorted_values[max(math.ceil(round(q * len(sorted_values), 9)) - 1, 0)]


def quintile_expert_fractions(column, labels):
    """
    Expert share per quintile of a feature

    Boundaries are the nearest-rank 20th/40th/60th/80th percentiles; a value
    equal to a boundary falls in the lower bucket.

    Args:
        column: feature values of labelled developers
        labels: ternary class names aligned with column

    Returns:
        dict with boundaries, counts, experts, fractions (five each) and degenerate
    """
    values = np.asarray(column, dtype=float)
    experts = np.asarray([label == 'expert' for label in labels])
    if len(values) != len(experts):
        raise StatisticsError(f"{len(values)} values for {len(experts)} labels")
    if len(values) < 5:
        raise StatisticsError(f"Quintiles need at least 5 labelled rows, got {len(values)}")

    ordered = np.sort(values)
    boundaries = [float(nearest_rank(ordered, q)) for q in (0.2, 0.4, 0.6, 0.8)]
    buckets = np.searchsorted(boundaries, values, side='left')

    counts = np.bincount(buckets, minlength=5)
    expert_counts = np.bincount(buckets, weights=experts.astype(float), minlength=5).astype(int)
    fractions = [float(e / c) if c else 0.0 for e, c in zip(expert_counts, counts)]
    return {
        'boundaries': boundaries,
        'counts': counts.tolist(),
        'experts': expert_counts.tolist(),
        'fractions': fractions,
        'degenerate': bool(ordered[0] == ordered[-1]),
    }


def quintile_table(matrix, labels, library=''):
    """quintiles.csv rows for every column of a matrix; labels maps developer to ternary class"""
    rows = [row for row, developer in enumerate(matrix.developers) if developer in labels]
    classes = [labels[matrix.developers[row]] for row in rows]

    records = []
    for feature in matrix.columns:
        result = quintile_expert_fractions(matrix.column(feature)[rows], classes)
        edges = [None, *result['boundaries'], None]
        for bucket in range(5):
            records.append({
                'library': library,
                'feature': feature,
                'quintile': bucket + 1,
                'lower': edges[bucket],
                'upper': edges[bucket + 1],
                'members': result['counts'][bucket],
                'experts': result['experts'][bucket],
                'expert_fraction': result['fractions'][bucket],
                'degenerate': 'true' if result['degenerate'] else 'false',
            })
    return pd.DataFrame(records, columns=QUINTILE_COLUMNS)
