"""Immutable undirected graph with node labels, plus edge-list/label-file IO."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


class ParseError(ValueError):
    """Malformed input file; carries the source name and 1-based line number."""

    def __init__(self, message: str, source: str = "<input>", line: int | None = None):
        self.source = source
        self.line = line
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class EdgeFlip:
    """A single edge modification; endpoints are stored with u < v."""

    u: int
    v: int
    action: str  # "add" or "delete"

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"flip endpoints must differ, got ({self.u}, {self.v})")
        if self.action not in ("add", "delete"):
            raise ValueError(f"flip action must be 'add' or 'delete', got {self.action!r}")
        if self.u > self.v:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    def inverse(self) -> "EdgeFlip":
        return EdgeFlip(self.u, self.v, "delete" if self.action == "add" else "add")


class Graph:
    """Undirected simple graph (no self-loops) with integer node labels.

    Immutable after construction: perturbations produce new instances via
    apply_flips. Adjacency is kept as a CSR structure with sorted neighbor
    lists so kernels and binary-search edge queries can share it.
    """

    __slots__ = ("n", "indptr", "indices", "labels", "class_count",
                 "_betweenness", "_eigencentrality", "_clustering")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray,
                 labels: np.ndarray, class_count: int):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.labels = labels
        self.class_count = int(class_count)
        for arr in (self.indptr, self.indices, self.labels):
            arr.setflags(write=False)
        self._betweenness = None
        self._eigencentrality = None
        self._clustering = None

    # -- construction ----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[int], class_count: int | None = None) -> "Graph":
        if n < 1:
            raise ValueError(f"node count must be >= 1, got {n}")
        labels = np.asarray(labels, dtype=np.int32)
        if labels.shape != (n,):
            raise ValueError(f"expected {n} labels, got shape {labels.shape}")
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be non-negative")
        derived = int(labels.max()) + 1 if labels.size else 1
        if class_count is None:
            class_count = max(2, derived)  # invariant: at least two classes
        elif class_count < derived:
            raise ValueError(f"class_count {class_count} below max label {derived - 1}")
        elif class_count < 2:
            raise ValueError("class_count must be >= 2")

        pairs = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                continue  # self-loops dropped unconditionally
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} nodes")
            pairs.add((u, v) if u < v else (v, u))
        indptr, indices = _pairs_to_csr(n, pairs)
        return cls(n, indptr, indices, labels, class_count)

    def _replace_edges(self, pairs: set[tuple[int, int]]) -> "Graph":
        indptr, indices = _pairs_to_csr(self.n, pairs)
        return Graph(self.n, indptr, indices, self.labels, self.class_count)

    # -- queries ----------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return self.indices.shape[0] // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, i: int) -> int:
        self._check_node(i)
        return int(self.indptr[i + 1] - self.indptr[i])

    def neighbors(self, i: int) -> np.ndarray:
        self._check_node(i)
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        self._check_node(u)
        self._check_node(v)
        if u == v:
            return False
        row = self.neighbors(u)
        k = np.searchsorted(row, v)
        return k < row.shape[0] and row[k] == v

    def common_neighbors(self, u: int, v: int) -> np.ndarray:
        """Sorted common neighbors; for u == v this is just the neighbor set."""
        if u == v:
            return self.neighbors(u).copy()
        return np.intersect1d(self.neighbors(u), self.neighbors(v), assume_unique=True)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each undirected edge once, as (u, v) with u < v, sorted."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield (u, int(v))

    def edge_pairs(self) -> set[tuple[int, int]]:
        return set(self.edges())

    def label(self, i: int) -> int:
        self._check_node(i)
        return int(self.labels[i])

    def _check_node(self, i: int) -> None:
        if not (0 <= i < self.n):
            raise ValueError(f"node id {i} out of range [0, {self.n})")

    def adjacency_equal(self, other: "Graph") -> bool:
        return (self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    # -- perturbation -----------------------------------------------------

    def apply_flips(self, flips: Sequence[EdgeFlip]) -> "Graph":
        """Return a new graph with the flips applied in order.

        A flip must be applicable when reached: adding an absent pair or
        deleting a present one, otherwise the offending flip is named.
        """
        pairs = self.edge_pairs()
        for f in flips:
            self._check_node(f.u)
            self._check_node(f.v)
            key = (f.u, f.v)
            if f.action == "add":
                if key in pairs:
                    raise ValueError(f"cannot add existing edge {key}")
                pairs.add(key)
            else:
                if key not in pairs:
                    raise ValueError(f"cannot delete missing edge {key}")
                pairs.remove(key)
        return self._replace_edges(pairs)


def _pairs_to_csr(n: int, pairs: set[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    if not pairs:
        return np.zeros(n + 1, dtype=np.int32), np.zeros(0, dtype=np.int32)
    arr = np.asarray(sorted(pairs), dtype=np.int32)
    src = np.concatenate([arr[:, 0], arr[:, 1]])
    dst = np.concatenate([arr[:, 1], arr[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int32)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int32)


@dataclass(frozen=True)
class EgoSubgraph:
    """Induced subgraph on all nodes within a hop radius of a center node.

    members is sorted ascending; indptr/indices describe the induced
    adjacency in local coordinates (positions within members).
    """

    center: int
    members: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def node_count(self) -> int:
        return self.members.shape[0]

    @property
    def edge_count(self) -> int:
        return self.indices.shape[0] // 2

    @property
    def local_center(self) -> int:
        return int(np.searchsorted(self.members, self.center))

    def local_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges_global(self) -> list[tuple[int, int]]:
        """Induced edges in original node ids, each once with u < v."""
        out = []
        for li in range(self.node_count):
            u = int(self.members[li])
            for lj in self.indices[self.indptr[li]:self.indptr[li + 1]]:
                v = int(self.members[lj])
                if u < v:
                    out.append((u, v))
        return out


def ego_subgraph(g: Graph, center: int, radius: int = 2) -> EgoSubgraph:
    """Induced subgraph on every node within `radius` hops of center."""
    g._check_node(center)
    dist = {center: 0}
    frontier = [center]
    for d in range(1, radius + 1):
        nxt = []
        for u in frontier:
            for v in g.neighbors(u):
                v = int(v)
                if v not in dist:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    members = np.asarray(sorted(dist), dtype=np.int32)
    lookup = {int(m): i for i, m in enumerate(members)}
    indptr = np.zeros(members.shape[0] + 1, dtype=np.int32)
    local_rows = []
    for li, m in enumerate(members):
        row = [lookup[int(v)] for v in g.neighbors(int(m)) if int(v) in lookup]
        local_rows.append(np.asarray(sorted(row), dtype=np.int32))
        indptr[li + 1] = indptr[li] + len(row)
    indices = (np.concatenate(local_rows) if local_rows and indptr[-1] > 0
               else np.zeros(0, dtype=np.int32))
    return EgoSubgraph(center=center, members=members, indptr=indptr, indices=indices)


# -- file IO ---------------------------------------------------------------


def _read_lines(source) -> tuple[str, list[str]]:
    if hasattr(source, "read"):
        name = getattr(source, "name", "<stream>")
        return name, source.read().splitlines()
    name = os.fspath(source)
    with open(name, "r", encoding="utf-8") as fh:
        return name, fh.read().splitlines()


def _parse_int_pairs(source, what: str) -> tuple[str, list[tuple[int, int, int]]]:
    """Parse 'a b' lines, skipping blanks and '#' comments; keeps line numbers."""
    name, lines = _read_lines(source)
    out = []
    for lineno, raw in enumerate(lines, 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2:
            raise ParseError(f"expected two whitespace-separated {what} fields, "
                             f"got {raw.strip()!r}", name, lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer {what} entry {raw.strip()!r}", name, lineno) from None
        if a < 0 or b < 0:
            raise ParseError(f"negative {what} entry {raw.strip()!r}", name, lineno)
        out.append((a, b, lineno))
    return name, out


def load_graph_with_mapping(edge_source, label_source) -> tuple[Graph, np.ndarray]:
    """Load a graph, remapping node ids to a dense 0-based range.

    Returns (graph, original_ids) where original_ids[new_id] = id as written
    in the input files. Duplicate edges and self-loops are dropped; every
    node appearing in either file must have exactly one label.
    """
    edge_name, edge_rows = _parse_int_pairs(edge_source, "edge")
    label_name, label_rows = _parse_int_pairs(label_source, "label")

    raw_labels: dict[int, int] = {}
    for node, lab, lineno in label_rows:
        if node in raw_labels and raw_labels[node] != lab:
            raise ParseError(f"conflicting labels for node {node}", label_name, lineno)
        raw_labels[node] = lab

    ids = set(raw_labels)
    for u, v, _ in edge_rows:
        ids.add(u)
        ids.add(v)
    if not ids:
        raise ParseError("no nodes found in inputs", edge_name)
    original = np.asarray(sorted(ids), dtype=np.int64)
    remap = {int(o): i for i, o in enumerate(original)}

    missing = [int(o) for o in original if int(o) not in raw_labels]
    if missing:
        raise ParseError(f"nodes without labels: {missing[:10]}"
                         + ("..." if len(missing) > 10 else ""), label_name)

    n = original.shape[0]
    labels = np.asarray([raw_labels[int(o)] for o in original], dtype=np.int32)
    edges = [(remap[u], remap[v]) for u, v, _ in edge_rows]
    graph = Graph.from_edges(n, edges, labels)
    return graph, original


def load_graph(edge_source, label_source) -> Graph:
    """Load a graph from an edge-list file and a 'node label' file."""
    graph, _ = load_graph_with_mapping(edge_source, label_source)
    return graph


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# u v\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def write_labels(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# node label\n")
        for i in range(g.n):
            fh.write(f"{i} {g.label(i)}\n")
