"""Network construction, r-stage neighbourhoods and structural diagnostics."""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from core.errors import InputError
from core.models import Network, NeighborStages


def _labels(n: int, labels: Optional[Sequence[str]]) -> Tuple[str, ...]:
    if labels is None:
        return tuple(str(i) for i in range(n))
    if len(labels) != n:
        raise InputError(f"{len(labels)} labels given for {n} nodes")
    return tuple(labels)


def fully_connected(n: int, labels: Optional[Sequence[str]] = None) -> Network:
    """Complete graph on n nodes."""
    if n < 1:
        raise InputError(f"fully connected network needs n >= 1, got {n}")
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    return Network(nodes=_labels(n, labels), edges=edges)


def empty_network(n: int, labels: Optional[Sequence[str]] = None) -> Network:
    """Edgeless graph, the HAR/HARX benchmark case."""
    if n < 1:
        raise InputError(f"network needs n >= 1, got {n}")
    return Network(nodes=_labels(n, labels))


def from_edges(labels: Sequence[str], edges: Iterable[Tuple[int, int]]) -> Network:
    return Network(nodes=tuple(labels), edges=tuple(tuple(e) for e in edges))


def neighbor_stages(net: Network, r_max: int) -> NeighborStages:
    """
    Shortest-path distance classes up to r_max for every node.

    N^(r)(i) holds the nodes at distance exactly r; disconnected nodes and
    stages beyond the eccentricity of i are empty.
    """
    if r_max < 1:
        raise InputError(f"r_max must be >= 1, got {r_max}")

    graph = net.to_graph()
    members: List[Tuple[Tuple[int, ...], ...]] = []
    for i in range(net.n_nodes):
        dist = nx.single_source_shortest_path_length(graph, i, cutoff=r_max)
        stages: Dict[int, List[int]] = {r: [] for r in range(1, r_max + 1)}
        for j, d in dist.items():
            if d >= 1:
                stages[d].append(j)
        members.append(tuple(tuple(sorted(stages[r])) for r in range(1, r_max + 1)))

    return NeighborStages(n_nodes=net.n_nodes, r_max=r_max, members=tuple(members))


def stage_weight_matrices(net: Network, r_max: int) -> List[np.ndarray]:
    """[W^(1), ..., W^(r_max)]; empty when r_max is 0."""
    if r_max < 1:
        return []
    stages = neighbor_stages(net, r_max)
    return [stages.weight_matrix(r) for r in range(1, r_max + 1)]


def edge_count(net: Network) -> int:
    return len(net.edges)


def jaccard(a: Network, b: Network) -> float:
    """Shared edges over union of edges; two empty graphs score 1."""
    if a.n_nodes != b.n_nodes:
        raise InputError(f"Cannot compare networks with {a.n_nodes} and {b.n_nodes} nodes")
    union = a.edge_set | b.edge_set
    if not union:
        return 1.0
    return len(a.edge_set & b.edge_set) / len(union)
