import numpy as np
import pytest
from hypothesis import settings

from chanopt.channels import Channel
from chanopt.control import CostSpec
from chanopt.measures import DiscreteMeasure, Grid

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def simplex(rng, k, sparse=False):
    w = rng.dirichlet(np.ones(k))
    if sparse and k > 1:
        w[rng.random(k) < 0.3] = 0.0
        if w.sum() == 0:
            w[rng.integers(k)] = 1.0
    return w / w.sum()


def random_problem(seed, nx=4, ny=4, nu=3, sparse=False):
    """Prior, channel and cost on atom grids, all drawn from one seed."""
    rng = np.random.default_rng(seed)
    xg, yg, ug = Grid.atoms(range(nx)), Grid.atoms(range(ny)), Grid.atoms(range(nu))
    P = DiscreteMeasure(xg, simplex(rng, nx, sparse))
    Q = Channel(xg, yg, np.vstack([simplex(rng, ny, sparse) for _ in range(nx)]))
    cost = CostSpec(xg, ug, rng.uniform(0, 1, (nx, nu)))
    return P, Q, cost


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
