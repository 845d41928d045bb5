import numpy as np
import pytest

from nbrwcut import CommunitySpec


def random_spec(rng, n_max=40, dmin=2, dmax=5):
    """A valid spec with small vertex counts; parity fixed by bumping one degree."""
    degs = []
    for _ in range(2):
        d = rng.integers(dmin, dmax + 1, size=rng.integers(2, n_max // 2 + 1))
        if d.sum() % 2:
            d[0] += 1
        degs.append(d.tolist())
    cap = min(sum(degs[0]), sum(degs[1]))
    p = 2 * int(rng.integers(1, cap // 2 + 1))
    return CommunitySpec(degs[0], degs[1], p)


def dense_nbrw(graph):
    """Transition matrix written straight from the definition, with loops."""
    N = graph.N
    P = np.zeros((N, N))
    for x in range(N):
        e = int(graph.eta[x])
        v = int(graph.owner[e])
        nbrs = [y for y in range(N) if graph.owner[y] == v and y != e]
        for y in nbrs:
            P[x, y] += 1.0 / len(nbrs)
    return P


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_spec():
    return CommunitySpec([3, 3, 4, 2, 4], [3, 4, 4, 3, 2], 4)
