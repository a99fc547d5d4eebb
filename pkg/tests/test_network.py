import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.sparse.csgraph import shortest_path

from analysis.network import (
    edge_count,
    empty_network,
    from_edges,
    fully_connected,
    jaccard,
    neighbor_stages,
    stage_weight_matrices,
)
from core.errors import InputError
from core.models import Network


def _path(n):
    return from_edges([str(i) for i in range(n)], [(i, i + 1) for i in range(n - 1)])


def test_fully_connected():
    assert fully_connected(3).edges == ((0, 1), (0, 2), (1, 2))
    assert fully_connected(1).edges == ()
    assert edge_count(fully_connected(10)) == 45
    with pytest.raises(InputError):
        fully_connected(0)


def test_edges_are_normalised():
    net = Network(nodes=("a", "b", "c"), edges=((2, 0), (0, 2), (1, 2)))
    assert net.edges == ((0, 2), (1, 2))
    with pytest.raises(ValueError):
        Network(nodes=("a", "b"), edges=((1, 1),))
    with pytest.raises(ValueError):
        Network(nodes=("a", "b"), edges=((0, 2),))


def test_edge_count():
    assert edge_count(empty_network(4)) == 0
    assert edge_count(_path(4)) == 3


def test_path_stages():
    stages = neighbor_stages(_path(4), 3)
    assert stages.members[0] == ((1,), (2,), (3,))
    assert stages.members[1] == ((0, 2), (3,), ())


def test_complete_graph_stages():
    stages = neighbor_stages(fully_connected(5), 2)
    for i in range(5):
        assert stages.members[i][0] == tuple(j for j in range(5) if j != i)
        assert stages.members[i][1] == ()
        assert stages.weights(i, 1) == {j: 0.25 for j in range(5) if j != i}
        assert stages.weights(i, 2) == {}


def test_stages_match_shortest_path_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        p = rng.uniform(0.05, 0.6)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        net = from_edges([str(i) for i in range(n)], edges)
        r_max = int(rng.integers(1, 5))

        dist = shortest_path(net.adjacency(), unweighted=True, directed=False)
        stages = neighbor_stages(net, r_max)
        for i in range(n):
            for r in range(1, r_max + 1):
                expected = tuple(int(j) for j in np.flatnonzero(dist[i] == r))
                assert stages.members[i][r - 1] == expected
                assert i not in stages.members[i][r - 1]

        for W in stage_weight_matrices(net, r_max):
            sums = W.sum(axis=1)
            assert np.all(np.isclose(sums, 0.0) | np.isclose(sums, 1.0))


def test_disconnected_nodes_have_empty_stages():
    net = from_edges(["a", "b", "c"], [(0, 1)])
    stages = neighbor_stages(net, 2)
    assert stages.members[2] == ((), ())
    assert_allclose(stages.weight_matrix(1)[2], 0.0)


def test_neighbor_stages_rejects_zero_rmax():
    with pytest.raises(InputError):
        neighbor_stages(_path(3), 0)
    assert stage_weight_matrices(_path(3), 0) == []


def test_jaccard():
    labels = [str(i) for i in range(3)]
    a = from_edges(labels, [(0, 1), (0, 2)])
    b = from_edges(labels, [(0, 1), (1, 2)])
    assert jaccard(a, a) == 1.0
    assert jaccard(a, b) == pytest.approx(1 / 3)
    assert jaccard(a, b) == jaccard(b, a)
    assert jaccard(from_edges(labels, [(0, 1)]), from_edges(labels, [(1, 2)])) == 0.0
    assert jaccard(empty_network(3), empty_network(3)) == 1.0
    with pytest.raises(InputError):
        jaccard(a, empty_network(4))
