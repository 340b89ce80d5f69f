"""
Corpus-level figures about candidate experts and the survey sample drawn from them.
"""
import logging
import math

logger = logging.getLogger(__name__)


def candidate_summary(library, projects, vectors):
    """
    Client projects and candidate experts of a library

    Args:
        library: library id
        projects: ClientProject list of the corpus
        vectors: FeatureVector list (candidate experts only)

    Returns:
        dict with client_projects, candidate_experts, single_project_share
        (share of candidates with projects = 1) and max_projects
    """
    project_counts = [vector['projects'] for vector in vectors]
    single = sum(1 for count in project_counts if count == 1)
    return {
        'library': library,
        'client_projects': len(projects),
        'candidate_experts': len(vectors),
        'single_project_share': round(single / len(vectors), 6) if vectors else 0.0,
        'max_projects': max(project_counts, default=0),
    }


def survey_sample(vectors, fraction, rng):
    """
    Uniform random sample of candidate experts to survey

    Args:
        vectors: FeatureVector list
        fraction: share in (0, 1]; 1 surveys everyone
        rng: numpy Generator

    Returns:
        sorted list of developer ids, ceil(fraction * n) of them
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"Sample fraction must be in (0, 1], got {fraction}")
    developers = sorted(vector.developer for vector in vectors)
    size = math.ceil(fraction * len(developers))
    chosen = rng.choice(len(developers), size=size, replace=False) if developers else []
    sample = sorted(developers[index] for index in chosen)
    logger.info(f"Surveying {len(sample)} of {len(developers)} candidate experts")
    return sample
