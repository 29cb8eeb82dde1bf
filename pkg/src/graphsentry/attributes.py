"""Topological node and ego-subgraph attributes.

Seventeen attributes per target node, in a frozen order: six measured on the
full graph (degree, clustering, betweenness, closeness, eigenvector,
avg_neighbor_degree) and eleven on the induced subgraph of the target's
2-hop neighborhood (node/edge counts, average degree, leaf fraction,
spectral radius, density, and the subgraph means of the five node-level
centralities). Degenerate cases (isolated nodes, singleton or edgeless
subgraphs) produce 0, never NaN.
"""

from __future__ import annotations

import csv
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .graph import EgoSubgraph, Graph, ego_subgraph

ATTRIBUTE_NAMES: tuple[str, ...] = (
    "degree",
    "clustering",
    "betweenness",
    "closeness",
    "eigenvector",
    "avg_neighbor_degree",
    "sub_node_count",
    "sub_edge_count",
    "sub_avg_degree",
    "sub_leaf_fraction",
    "sub_spectral_radius",
    "sub_density",
    "sub_avg_clustering",
    "sub_avg_betweenness",
    "sub_avg_closeness",
    "sub_avg_eigenvector",
    "sub_avg_neighbor_degree",
)

NODE_LEVEL_NAMES = ATTRIBUTE_NAMES[:6]
SUBGRAPH_LEVEL_NAMES = ATTRIBUTE_NAMES[6:]

# power-iteration stopping rule; tight enough that the returned vector agrees
# with a dense eigensolve well inside 1e-6
EIG_TOL = 1e-12
EIG_MAX_ITER = 10000


def degree_value(g: Graph, i: int) -> float:
    return float(g.degree(i))


def clustering_coefficient(g: Graph, i: int) -> float:
    """Fraction of linked neighbor pairs, 2L/(d(d-1)); 0 when degree <= 1."""
    g._check_node(i)
    return float(_clustering_cache(g)[i])


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Unnormalized shortest-path betweenness, unordered pairs, all nodes."""
    if g._betweenness is None:
        bc = _kernels.brandes_betweenness(g.indptr, g.indices, g.n)
        bc.setflags(write=False)
        g._betweenness = bc
    return g._betweenness


def closeness_centrality(g: Graph, i: int) -> float:
    """Reachable-set closeness scaled by component coverage; isolated -> 0."""
    g._check_node(i)
    return float(_kernels.closeness_single(g.indptr, g.indices, g.n, i))


def eigenvector_centrality(g: Graph, tol: float = EIG_TOL,
                           max_iter: int = EIG_MAX_ITER) -> np.ndarray:
    """Nonnegative dominant eigenvector, unit Euclidean norm, all nodes.

    Damped power iteration from the all-ones direction; isolated nodes are
    exactly 0 and an edgeless graph yields the zero vector.
    """
    use_cache = tol == EIG_TOL and max_iter == EIG_MAX_ITER
    if use_cache and g._eigencentrality is not None:
        return g._eigencentrality
    vec, _ = _kernels.power_iteration_damped(g.indptr, g.indices, g.n,
                                             float(tol), int(max_iter))
    vec[g.degrees == 0] = 0.0
    np.maximum(vec, 0.0, out=vec)
    vec.setflags(write=False)
    if use_cache:
        g._eigencentrality = vec
    return vec


def avg_neighbor_degree(g: Graph, i: int) -> float:
    g._check_node(i)
    nbrs = g.neighbors(i)
    if nbrs.shape[0] == 0:
        return 0.0
    return float(np.mean(g.degrees[nbrs]))


def _clustering_cache(g: Graph) -> np.ndarray:
    if g._clustering is None:
        c = _kernels.clustering_all(g.indptr, g.indices, g.n)
        c.setflags(write=False)
        g._clustering = c
    return g._clustering


def node_attributes(g: Graph, i: int) -> np.ndarray:
    """The six full-graph attributes of node i, in frozen order."""
    g._check_node(i)
    return np.array([
        degree_value(g, i),
        clustering_coefficient(g, i),
        float(betweenness_centrality(g)[i]),
        closeness_centrality(g, i),
        float(eigenvector_centrality(g)[i]),
        avg_neighbor_degree(g, i),
    ])


def subgraph_attributes(g: Graph, center: int) -> np.ndarray:
    """The eleven 2-hop ego-subgraph attributes of center, in frozen order."""
    sub = ego_subgraph(g, center, radius=2)
    return ego_attribute_values(sub)


def ego_attribute_values(sub: EgoSubgraph) -> np.ndarray:
    n = sub.node_count
    e = sub.edge_count
    local_deg = sub.local_degrees()
    avg_degree = 2.0 * e / n
    leaf_fraction = float(np.count_nonzero(local_deg == 1)) / n
    density = 2.0 * e / (n * (n - 1.0)) if n > 1 else 0.0

    ec_vec, spectral_radius = _kernels.power_iteration_damped(
        sub.indptr, sub.indices, n, EIG_TOL, EIG_MAX_ITER)
    ec_vec = ec_vec.copy()
    ec_vec[local_deg == 0] = 0.0

    mean_clustering = float(np.mean(_kernels.clustering_all(sub.indptr, sub.indices, n)))
    mean_betweenness = float(np.mean(_kernels.brandes_betweenness(sub.indptr, sub.indices, n)))
    mean_closeness = float(np.mean(_kernels.closeness_all(sub.indptr, sub.indices, n)))
    mean_eigenvector = float(np.mean(np.maximum(ec_vec, 0.0)))
    mean_nbr_degree = float(np.mean(_kernels.avg_neighbor_degree_all(sub.indptr, sub.indices, n)))

    return np.array([
        float(n),
        float(e),
        avg_degree,
        leaf_fraction,
        float(spectral_radius),
        density,
        mean_clustering,
        mean_betweenness,
        mean_closeness,
        mean_eigenvector,
        mean_nbr_degree,
    ])


def attribute_vector(g: Graph, target: int) -> np.ndarray:
    """All 17 attributes of target, ordered as ATTRIBUTE_NAMES."""
    return np.concatenate([node_attributes(g, target), subgraph_attributes(g, target)])


def attribute_matrix(g: Graph, nodes: Sequence[int] | None = None) -> np.ndarray:
    """Row per requested node (default: all nodes), 17 columns."""
    if nodes is None:
        nodes = range(g.n)
    rows = [attribute_vector(g, int(i)) for i in nodes]
    if not rows:
        return np.zeros((0, len(ATTRIBUTE_NAMES)))
    return np.vstack(rows)


class NodeAttributeExtractor:
    """Estimator-style wrapper mapping (graph, nodes) to the 17-column matrix.

    Stateless: fit is a no-op kept for pipeline compatibility; transform
    accepts a Graph and an optional node subset.
    """

    def __init__(self, eig_tol: float = EIG_TOL, eig_max_iter: int = EIG_MAX_ITER):
        self.eig_tol = eig_tol
        self.eig_max_iter = eig_max_iter

    def get_params(self) -> dict:
        return {"eig_tol": self.eig_tol, "eig_max_iter": self.eig_max_iter}

    def set_params(self, **params) -> "NodeAttributeExtractor":
        for key, value in params.items():
            if key not in ("eig_tol", "eig_max_iter"):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, graph: Graph | None = None, y=None) -> "NodeAttributeExtractor":
        return self

    def transform(self, graph: Graph, nodes: Sequence[int] | None = None) -> np.ndarray:
        if not isinstance(graph, Graph):
            raise TypeError("transform expects a Graph")
        return attribute_matrix(graph, nodes)

    def fit_transform(self, graph: Graph, nodes: Sequence[int] | None = None) -> np.ndarray:
        return self.fit(graph).transform(graph, nodes)

    def get_feature_names_out(self) -> list[str]:
        return list(ATTRIBUTE_NAMES)


def write_feature_csv(handle, g: Graph, nodes: Iterable[int] | None = None) -> None:
    """CSV of attribute rows: node_id, label, then the 17 frozen columns."""
    node_list = list(range(g.n)) if nodes is None else [int(i) for i in nodes]
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["node_id", "label", *ATTRIBUTE_NAMES])
    for i in node_list:
        vec = attribute_vector(g, i)
        writer.writerow([i, g.label(i), *[repr(float(x)) for x in vec]])
