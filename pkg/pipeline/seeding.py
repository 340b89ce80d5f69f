"""
Named random substreams derived from the run's root seed.
"""
import hashlib

import numpy as np


def substream_seed(root_seed, *names):
    key = ':'.join([str(root_seed), *names]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], 'big')


def substream(root_seed, *names):
    """Generator for one stochastic step, e.g. substream(42, 'react', 'cluster')"""
    return np.random.default_rng(substream_seed(root_seed, *names))
