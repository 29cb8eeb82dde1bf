"""Seeded synthetic graphs with community-like block labels."""

from __future__ import annotations

from collections import deque

import numpy as np

from .graph import Graph

SYNTHETIC_MODELS = ("erdos-renyi", "barabasi-albert")


def erdos_renyi_edges(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    edges = []
    for i in range(n - 1):
        mask = rng.random(n - i - 1) < p
        for j in np.nonzero(mask)[0]:
            edges.append((i, i + 1 + int(j)))
    return edges


def barabasi_albert_edges(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Preferential attachment: each new node links to m distinct earlier nodes."""
    m = int(m)
    if m < 1 or m >= n:
        raise ValueError(f"attachment count must satisfy 1 <= m < n, got m={m}, n={n}")
    edges = []
    repeated: list[int] = []
    targets = list(range(m))
    for new in range(m, n):
        chosen = set()
        while len(chosen) < m:
            if repeated:
                pick = repeated[int(rng.integers(0, len(repeated)))]
            else:
                pick = targets[int(rng.integers(0, len(targets)))]
            chosen.add(pick)
        for t in chosen:
            edges.append((t, new))
            repeated.append(t)
            repeated.append(new)
    return edges


def block_labels(n: int, edges: list[tuple[int, int]], n_blocks: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Community-like labels: multi-source BFS regions from seeded roots.

    Each node takes the block of the nearest root (earlier root wins ties);
    nodes unreachable from every root get round-robin labels.
    """
    if n_blocks < 2:
        raise ValueError(f"need at least 2 blocks, got {n_blocks}")
    n_blocks = min(n_blocks, n)
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    roots = rng.choice(n, size=n_blocks, replace=False)
    labels = np.full(n, -1, dtype=np.int32)
    queue = deque()
    for b, r in enumerate(roots):
        labels[r] = b
        queue.append(int(r))
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if labels[v] < 0:
                labels[v] = labels[u]
                queue.append(v)
    spill = 0
    for i in range(n):
        if labels[i] < 0:
            labels[i] = spill % n_blocks
            spill += 1
    return labels


def generate_synthetic(model: str, size: int, parameter: float, seed: int,
                       classes: int = 3) -> Graph:
    """Seeded synthetic graph of the named model with block labels."""
    if model not in SYNTHETIC_MODELS:
        raise ValueError(f"unknown synthetic model {model!r}; known: {SYNTHETIC_MODELS}")
    if size < 2:
        raise ValueError(f"synthetic graphs need size >= 2, got {size}")
    rng = np.random.default_rng(seed)
    if model == "erdos-renyi":
        edges = erdos_renyi_edges(size, float(parameter), rng)
    else:
        edges = barabasi_albert_edges(size, int(parameter), rng)
    labels = block_labels(size, edges, int(classes), rng)
    return Graph.from_edges(size, edges, labels, class_count=max(2, int(classes)))


def generate_core_fringe_graph(size: int, seed: int, *,
                               avg_core_degree: float = 6.2,
                               core_fraction: float = 0.56,
                               pendant_fraction: float = 0.15,
                               blocks: int = 40,
                               classes: int = 7,
                               label_noise: float = 0.45,
                               min_core_degree: int = 5,
                               max_host_degree: int = 10) -> Graph:
    """Seeded benchmark graph: a well-connected core plus a degree-1 fringe.

    The core is an Erdos-Renyi graph raised to a minimum-degree floor, with
    community-like block labels where ``label_noise`` of the nodes are flipped
    to a different class — so most nodes sit in mixed-label neighborhoods.
    The fringe attaches pendant leaves (random labels) to mid-degree core
    hosts and fills the remaining nodes with detached two-node pairs whose
    endpoints always carry different labels.

    This layout gives edge-editing attacks realistic low-degree material to
    act on, so their structural footprints (degree and centrality drops,
    leaf-fraction shifts in the target's neighborhood) stay measurable, which
    is what the evaluation pipeline needs from its test corpora.
    """
    if size < 4:
        raise ValueError(f"core-fringe graphs need size >= 4, got {size}")
    if not 0.0 < core_fraction < 1.0:
        raise ValueError(f"core_fraction must be in (0, 1), got {core_fraction}")
    if not 0.0 <= label_noise <= 1.0:
        raise ValueError(f"label_noise must be in [0, 1], got {label_noise}")
    classes = max(2, int(classes))
    rng = np.random.default_rng(seed)
    core_n = max(2, int(size * core_fraction))
    edges = erdos_renyi_edges(core_n, min(1.0, avg_core_degree / (core_n - 1)), rng)
    eset = {(min(u, v), max(u, v)) for u, v in edges}
    degs = np.zeros(core_n, dtype=int)
    for u, v in edges:
        degs[u] += 1
        degs[v] += 1
    for u in range(core_n):
        guard = 0
        while degs[u] < min_core_degree and guard < 200:
            v = int(rng.integers(0, core_n))
            guard += 1
            key = (min(u, v), max(u, v))
            if v == u or key in eset:
                continue
            eset.add(key)
            degs[u] += 1
            degs[v] += 1
    edges = sorted(eset)
    core_labels = block_labels(core_n, edges, blocks, rng) % classes
    flip = rng.random(core_n) < label_noise
    offset = rng.integers(1, classes, size=core_n)
    core_labels = np.where(flip, (core_labels + offset) % classes, core_labels)
    labels = np.zeros(size, dtype=np.int64)
    labels[:core_n] = core_labels

    nxt = core_n
    n_pendants = max(1, round(size * pendant_fraction))
    eligible = [int(h) for h in
                np.flatnonzero((degs >= min_core_degree) & (degs <= max_host_degree))]
    if not eligible:
        eligible = [int(np.argmax(degs))]
    hosts = rng.choice(eligible, size=min(n_pendants, len(eligible)), replace=False)
    for h in hosts:
        if nxt >= size:
            break
        edges.append((int(h), nxt))
        labels[nxt] = rng.integers(0, classes)
        nxt += 1
    n_pairs = 0
    while nxt + 1 < size:
        edges.append((nxt, nxt + 1))
        lo = (n_pairs * 2) % classes
        hi = (n_pairs * 2 + 3) % classes
        if hi == lo:  # classes divides the offset; keep the labels distinct
            hi = (lo + 1) % classes
        labels[nxt] = lo
        labels[nxt + 1] = hi
        nxt += 2
        n_pairs += 1
    if nxt < size:
        edges.append((int(eligible[-1]), nxt))
        labels[nxt] = rng.integers(0, classes)
    return Graph.from_edges(size, edges, labels.astype(np.int32), class_count=classes)
