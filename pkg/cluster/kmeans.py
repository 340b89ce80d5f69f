"""
Lloyd's k-means with k-means++ seeding and best-of-restarts selection.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed

from .exceptions import ClusteringError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KMeansFit:
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    iterations: int
    restart: int = 0


def squared_distances(rows, centroids):
    return ((rows[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def seed_centroids(rows, k, rng):
    """k-means++: each next seed drawn with probability proportional to D(x)^2"""
    n = len(rows)
    chosen = [int(rng.integers(n))]
    nearest = ((rows - rows[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = nearest.sum()
        if total > 0:
            index = int(rng.choice(n, p=nearest / total))
        else:
            index = int(rng.integers(n))
        chosen.append(index)
        nearest = np.minimum(nearest, ((rows - rows[index]) ** 2).sum(axis=1))
    return rows[chosen].copy()


def _repair_empty(rows, centroids, assignment, distances):
    """Give every empty cluster the point farthest from its centroid in a cluster of 2+"""
    k = len(centroids)
    counts = np.bincount(assignment, minlength=k)
    for cluster in np.flatnonzero(counts == 0):
        own = distances[np.arange(len(rows)), assignment]
        eligible = counts[assignment] > 1
        farthest = int(np.argmax(np.where(eligible, own, -1.0)))
        counts[assignment[farthest]] -= 1
        assignment[farthest] = cluster
        counts[cluster] = 1
        centroids[cluster] = rows[farthest]
        distances[:, cluster] = ((rows - rows[farthest]) ** 2).sum(axis=1)
    return assignment


def lloyd(rows, centroids, max_iter=300):
    """
    Alternate assignment and update steps until the assignment is stable

    Raises:
        ClusteringError: inertia increased between iterations
    """
    centroids = np.array(centroids, dtype=float)
    k = len(centroids)
    assignment = None
    previous = np.inf

    for iteration in range(1, max_iter + 1):
        distances = squared_distances(rows, centroids)
        updated = _repair_empty(rows, centroids, np.argmin(distances, axis=1), distances)
        inertia = float(distances[np.arange(len(rows)), updated].sum())
        if inertia > previous + 1e-9 * (1 + previous):
            raise ClusteringError(f"Inertia rose from {previous} to {inertia} at iteration {iteration}")
        previous = inertia

        if assignment is not None and np.array_equal(updated, assignment):
            break
        assignment = updated
        centroids = np.array([rows[assignment == c].mean(axis=0) for c in range(k)])
    else:
        logger.debug(f"k-means stopped at {max_iter} iterations without converging")

    inertia = float(((rows - centroids[assignment]) ** 2).sum())
    return KMeansFit(centroids=centroids, assignment=assignment, inertia=inertia, iterations=iteration)


def _restart(rows, k, seed, max_iter, restart):
    rng = np.random.default_rng(seed)
    fit = lloyd(rows, seed_centroids(rows, k, rng), max_iter)
    return KMeansFit(fit.centroids, fit.assignment, fit.inertia, fit.iterations, restart)


def kmeans(rows, k, restarts=None, rng=None, max_iter=None, jobs=None):
    """
    Best of `restarts` k-means runs by inertia

    Args:
        rows: standardized feature rows
        k: cluster count
        restarts: independent k-means++ starts
        rng: numpy Generator; every restart gets its own seed from it

    Returns:
        KMeansFit of the lowest-inertia run (earliest restart on ties)
    """
    options = settings.LIBEXPERT
    restarts = restarts or options['KMEANS_RESTARTS']
    max_iter = max_iter or options['KMEANS_MAX_ITER']
    jobs = jobs or options['JOBS']
    rng = rng if rng is not None else np.random.default_rng()

    rows = np.asarray(rows, dtype=float)
    if k < 1 or len(rows) < k:
        raise ClusteringError(f"k-means needs at least k={k} rows, got {len(rows)}")

    seeds = rng.integers(0, 2 ** 63 - 1, size=restarts)
    fits = Parallel(n_jobs=jobs, prefer='threads')(
        delayed(_restart)(rows, k, int(seed), max_iter, restart) for restart, seed in enumerate(seeds)
    )

    best = fits[0]
    for fit in fits[1:]:
        if fit.inertia < best.inertia:
            best = fit
    return best
