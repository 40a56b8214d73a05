import numpy as np
import pytest

from monfg import catalog
from monfg._kernels import warmup


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT-compile the numba kernels once so individual tests measure math, not
    # compilation.
    warmup()


@pytest.fixture(scope="session")
def chicken():
    return catalog.get("chicken").payload


@pytest.fixture(scope="session")
def chicken_ce():
    return catalog.get("chicken_ce").payload


@pytest.fixture(scope="session")
def imbalancing():
    return catalog.get("imbalancing").payload


@pytest.fixture(scope="session")
def imbalancing_ce():
    return catalog.get("imbalancing_ce").payload


@pytest.fixture(scope="session")
def game2():
    return catalog.get("game2").payload


@pytest.fixture(scope="session")
def game2_ce():
    return catalog.get("game2_ce").payload


@pytest.fixture(scope="session")
def game3():
    return catalog.get("game3").payload


@pytest.fixture(scope="session")
def game3_ce():
    return catalog.get("game3_ce").payload


@pytest.fixture(scope="session")
def paper_utilities():
    return catalog.get("paper").payload


@pytest.fixture(scope="session")
def identity_utilities():
    return catalog.get("identity").payload


@pytest.fixture(scope="session")
def mixed_profile():
    return catalog.get("imbalancing_mixed_profile").payload


def random_game(rng: np.random.Generator, max_actions: int = 3, objectives: int = 2):
    """Random 2-player game with payoffs in [-5, 5]."""
    from monfg import MONFG

    k1 = int(rng.integers(2, max_actions + 1))
    k2 = int(rng.integers(2, max_actions + 1))
    payoffs = rng.uniform(-5.0, 5.0, size=(k1, k2, 2, objectives))
    return MONFG(payoffs)


def random_linear_pair(rng: np.random.Generator, objectives: int = 2):
    from monfg import LinearUtility

    out = []
    for _ in range(2):
        w = rng.uniform(0.05, 1.0, size=objectives)
        w = w / w.sum()
        out.append(LinearUtility(weights=tuple(w), nonneg_guard=False))
    return tuple(out)


def random_profile(rng: np.random.Generator, action_counts):
    from monfg import StrategyProfile

    return StrategyProfile.from_probs(
        [rng.dirichlet(np.ones(k)) for k in action_counts]
    )
