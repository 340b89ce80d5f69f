"""
Expert-cluster selection and the centroid-distance expert predictor.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from learn.labels import TERNARY_CLASSES
from preprocess.records import TransformLog
from .exceptions import ClusteringError
from .kmeans import kmeans

logger = logging.getLogger(__name__)

LIKELY_EXPERT = 'likely-expert'
UNKNOWN = 'unknown'


@dataclass
class ClusterModel:
    """
    A fitted k-means model with the expertise composition of its clusters

    Centroids live in the standardized space described by `transform_log`.
    """

    k: int
    centroids: np.ndarray
    assignment: dict
    composition: list
    expert_cluster: int
    threshold_used: float
    inertia: float = 0.0
    below_threshold: bool = False
    selection_trace: list = field(default_factory=list)
    transform_log: TransformLog = None

    @property
    def dimension(self):
        return self.centroids.shape[1]

    def ranked(self):
        """Cluster indexes by expert fraction, then size, descending"""
        return sorted(
            range(self.k),
            key=lambda c: (-self.composition[c]['expert'], -self.composition[c]['members'], c),
        )


def composition_of(assignment, labels, k):
    """Per cluster: member count, labelled count and novice/intermediate/expert fractions"""
    composition = []
    for cluster in range(k):
        in_cluster = [label for c, label in zip(assignment, labels) if c == cluster]
        labelled = [label for label in in_cluster if label is not None]
        entry = {'cluster': cluster, 'members': len(in_cluster), 'labelled': len(labelled)}
        for name in TERNARY_CLASSES:
            entry[name] = labelled.count(name) / len(labelled) if labelled else 0.0
        composition.append(entry)
    return composition


def expert_threshold(labels, override=None):
    """0.70 when experts are at least half of the labelled developers, else 0.60"""
    if override is not None:
        return float(override)
    options = settings.LIBEXPERT
    labelled = [label for label in labels if label is not None]
    base_rate = labelled.count('expert') / len(labelled)
    if base_rate >= options['EXPERT_BASE_RATE_SWITCH']:
        return options['EXPERT_THRESHOLD_HIGH']
    return options['EXPERT_THRESHOLD_LOW']


def _best_cluster(composition, threshold=None):
    candidates = [
        entry for entry in composition
        if entry['labelled'] and (threshold is None or entry['expert'] >= threshold)
    ]
    if not candidates:
        return None
    return max(candidates, key=lambda entry: (entry['expert'], entry['members'], -entry['cluster']))


def select_expert_cluster(rows, labels, k_max=None, rng=None, threshold=None, developers=None,
                          restarts=None, transform_log=None):
    """
    Smallest k whose k-means model holds an expert-dominated cluster

    Tries k = 2, 3, ... up to k_max and stops at the first model with a
    cluster whose expert fraction reaches the threshold. Among qualifying
    clusters the highest expert fraction wins, then the larger cluster. If no
    k qualifies, the model with the highest expert fraction seen is returned
    flagged below_threshold.

    Args:
        rows: standardized feature rows
        labels: ternary class name per row ('novice', 'intermediate', 'expert')
            or None for unlabelled rows
        k_max: largest k to try
        rng: numpy Generator
        threshold: expert-fraction override
        developers: row ids for the model's assignment map

    Returns:
        ClusterModel
    """
    rows = np.asarray(rows, dtype=float)
    labels = list(labels)
    k_max = k_max or settings.LIBEXPERT['K_MAX']
    rng = rng if rng is not None else np.random.default_rng()
    developers = list(developers) if developers is not None else [str(i) for i in range(len(rows))]

    if not any(label is not None for label in labels):
        raise ClusteringError("Expert-cluster selection needs labelled developers")
    if 'expert' not in labels:
        raise ClusteringError("Ground truth holds no expert")
    if k_max < 2:
        raise ClusteringError(f"k_max must be at least 2, got {k_max}")

    threshold = expert_threshold(labels, threshold)
    trace = []
    selected = fallback = None
    streams = rng.spawn(k_max - 1)

    for k, stream in zip(range(2, k_max + 1), streams):
        if k > len(rows):
            logger.warning(f"Stopping the k loop at {k - 1}: only {len(rows)} developers")
            break
        fit = kmeans(rows, k, restarts=restarts, rng=stream)
        composition = composition_of(fit.assignment, labels, k)
        best = _best_cluster(composition)
        trace.append({'k': k, 'best_expert_fraction': best['expert'] if best else 0.0})

        qualifying = _best_cluster(composition, threshold)
        if qualifying is not None:
            logger.info(f"k={k}: cluster {qualifying['cluster']} holds {qualifying['expert']:.0%} experts")
            selected = (fit, composition, qualifying, False)
            break
        if best is not None and (fallback is None or best['expert'] > fallback[2]['expert']):
            fallback = (fit, composition, best, True)

    candidate = selected or fallback
    if candidate is None:
        raise ClusteringError("No cluster holds a labelled developer")
    fit, composition, chosen, below = candidate
    if below:
        logger.warning(f"No cluster reached {threshold:.0%} experts up to k={k_max}; using the best found")

    return ClusterModel(
        k=len(fit.centroids),
        centroids=fit.centroids,
        assignment={developer: int(c) for developer, c in zip(developers, fit.assignment)},
        composition=composition,
        expert_cluster=chosen['cluster'],
        threshold_used=threshold,
        inertia=fit.inertia,
        below_threshold=below,
        selection_trace=trace,
        transform_log=transform_log,
    )


def predict_expert(model, vector):
    """
    Verdict for one developer from the nearest centroid

    Args:
        model: ClusterModel
        vector: FeatureVector (replayed through the model's transform log) or
            an already standardized row

    Returns:
        (verdict, distance_margin): likely-expert iff the expert centroid is
        strictly nearest; the margin is the nearest other centroid's distance
        minus the expert centroid's distance
    """
    if hasattr(vector, 'developer'):
        if model.transform_log is None:
            raise ClusteringError("Model has no transform log to replay raw features")
        row = model.transform_log.apply(vector)
    else:
        row = np.asarray(vector, dtype=float)

    if row.shape != (model.dimension,):
        raise ClusteringError(f"Expected a {model.dimension}-dimensional row, got shape {row.shape}")

    distances = np.sqrt(((model.centroids - row) ** 2).sum(axis=1))
    expert = distances[model.expert_cluster]
    others = np.delete(distances, model.expert_cluster)
    margin = float(others.min() - expert) if others.size else float('inf')
    return (LIKELY_EXPERT if margin > 0 else UNKNOWN), margin


def intersect_experts(verdicts):
    """
    Developers flagged likely-expert in every library

    Args:
        verdicts: {library: {developer: verdict}} or {library: set of experts}
    """
    if not verdicts:
        return set()
    sets = []
    for per_library in verdicts.values():
        if isinstance(per_library, dict):
            per_library = {d for d, verdict in per_library.items() if verdict == LIKELY_EXPERT}
        sets.append(set(per_library))
    return set.intersection(*sets)
