import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from graphsentry.attacks import run_attack
from graphsentry.attributes import attribute_vector
from oracles import random_graph

# graph kernels JIT-compile on first use; property deadlines would misfire on
# that one-off cost, and the heavier oracle comparisons are legitimately slow
settings.register_profile(
    "suite", deadline=None, max_examples=30,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch every compiled kernel once so timed tests never pay JIT cost."""
    g = random_graph(8, 0.4, seed=0)
    attribute_vector(g, 0)
    for name in ("nettack", "meta", "gradargmax"):
        run_attack(g, name, 0, budget=1)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
