import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def dense_from_canonical(p, d, entries):
    """Brute-force dense array: every permutation of each canonical tuple gets its value."""
    arr = np.zeros((p,) * d)
    for idx, v in entries.items():
        for perm in set(itertools.permutations(idx)):
            arr[perm] = v
    return arr


def canonical_dict(T):
    """Map canonical tuple -> value, enumerated independently of the package."""
    tuples = itertools.combinations_with_replacement(range(T.p), T.d)
    return dict(zip(tuples, T.values))


def dense_form(arr, x):
    """<T, x^d> by an explicit sum over all p^d tuples."""
    total = 0.0
    for idx in itertools.product(range(arr.shape[0]), repeat=arr.ndim):
        total += arr[idx] * np.prod([x[i] for i in idx])
    return total
