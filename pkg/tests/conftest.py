import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from annealgraph.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, min_n=0, max_n=9):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, keep in zip(pairs, mask) if keep])


def enumerate_min(energy_fn, n, values=(0, 1)):
    """Reference minimum by plain itertools enumeration (independent of brute_force)."""
    best, arg = None, []
    for x in itertools.product(values, repeat=n):
        e = energy_fn(np.array(x))
        if best is None or e < best - 1e-9:
            best, arg = e, [x]
        elif abs(e - best) <= 1e-9:
            arg.append(x)
    return best, arg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
