"""Independent oracles shared by the test modules."""
import itertools

import numpy as np


def subset_sr(k, r):
    """S_r by explicit enumeration of r-subsets."""
    if r == 0:
        return 1.0
    return float(sum(np.prod(c) for c in itertools.combinations(list(k), r)))


def random_symmetric(rng, n, scale=1.0):
    m = rng.normal(size=(n, n))
    return scale * (m + m.T) / 2


def random_jet_data(rng, n, bound=2.0):
    """Gradient and symmetric Hessian with entries of size up to ``bound``."""
    g = rng.uniform(-bound, bound, n) / np.sqrt(n)
    h = rng.uniform(-bound, bound, (n, n)) / n
    return g, (h + h.T) / 2
