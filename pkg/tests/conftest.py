import numpy as np
import pytest

from lp import MatchingInstance
from market import MarketRates, geometric_instance, random_market


@pytest.fixture
def geometric():
    """Running example: one demand type, six supply types worth 2, 1, 0.5, ..."""
    inst = geometric_instance()
    return inst, MarketRates(lam=[1.5], pi=np.ones(6), beta=[4.0])


@pytest.fixture
def counterexample():
    inst = MatchingInstance.from_dense([[1.0]])
    return inst, MarketRates(lam=[0.0], pi=[0.625], beta=[1.0])


@pytest.fixture
def two_by_one():
    return MatchingInstance.from_dense([[2.0], [1.0]])


@pytest.fixture
def random_instances():
    def make(n, seed=0, sign="positive", max_types=6, density=1.0):
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(n):
            n_d, n_s = rng.integers(1, max_types + 1, size=2)
            out.append(random_market(rng, int(n_d), int(n_s), sign=sign, density=density))
        return out
    return make
