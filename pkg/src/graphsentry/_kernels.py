"""JIT-compiled kernels over CSR adjacency arrays.

These are plumbing: exact, allocation-light loops for quantities whose
pure-Python cost would dominate large-graph runs (betweenness, all-pairs
BFS aggregates, power iteration, attack-candidate scoring). Semantics are
pinned by the callers and their oracle tests.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def brandes_betweenness(indptr, indices, n):
    """Shortest-path betweenness per node, each unordered pair counted once."""
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int32)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        qh, qt, cnt = 0, 0, 0
        queue[qt] = s
        qt += 1
        while qh < qt:
            v = queue[qh]
            qh += 1
            order[cnt] = v
            cnt += 1
            for ei in range(indptr[v], indptr[v + 1]):
                w = indices[ei]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue[qt] = w
                    qt += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for i in range(cnt - 1, 0, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            for ei in range(indptr[w], indptr[w + 1]):
                v = indices[ei]
                if dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coeff
            bc[w] += delta[w]
    # each pair {s, t} contributes from both BFS roots
    for i in range(n):
        bc[i] *= 0.5
    return bc


@njit(cache=True)
def closeness_single(indptr, indices, n, s):
    """Component-scaled closeness of one node; 0 for isolated nodes."""
    if indptr[s + 1] == indptr[s] or n < 2:
        return 0.0
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    dist[s] = 0
    qh, qt = 0, 1
    queue[0] = s
    total = 0
    nreach = 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        for ei in range(indptr[v], indptr[v + 1]):
            w = indices[ei]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                total += dist[w]
                nreach += 1
                queue[qt] = w
                qt += 1
    return (nreach / total) * ((nreach - 1.0) / (n - 1.0))


@njit(cache=True)
def closeness_all(indptr, indices, n):
    out = np.zeros(n, dtype=np.float64)
    for s in range(n):
        out[s] = closeness_single(indptr, indices, n, s)
    return out


@njit(cache=True)
def clustering_all(indptr, indices, n):
    """Local clustering coefficient per node; 0 when degree <= 1."""
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        d = indptr[i + 1] - indptr[i]
        if d < 2:
            continue
        links = 0
        for a in range(indptr[i], indptr[i + 1]):
            u = indices[a]
            for b in range(a + 1, indptr[i + 1]):
                v = indices[b]
                lo = indptr[u]
                hi = indptr[u + 1]
                while lo < hi:
                    mid = (lo + hi) // 2
                    if indices[mid] < v:
                        lo = mid + 1
                    else:
                        hi = mid
                if lo < indptr[u + 1] and indices[lo] == v:
                    links += 1
        out[i] = 2.0 * links / (d * (d - 1.0))
    return out


@njit(cache=True)
def avg_neighbor_degree_all(indptr, indices, n):
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        d = indptr[i + 1] - indptr[i]
        if d == 0:
            continue
        acc = 0.0
        for ei in range(indptr[i], indptr[i + 1]):
            w = indices[ei]
            acc += indptr[w + 1] - indptr[w]
        out[i] = acc / d
    return out


@njit(cache=True)
def power_iteration_damped(indptr, indices, n, tol, max_iter):
    """Dominant eigenpair of the adjacency via damped power iteration.

    Iterates x <- normalize((A x + x) / 2) from the uniform vector; the
    half-step keeps the top eigenvalue strictly dominant in modulus, so the
    iteration converges for bipartite/periodic graphs too, to the Perron
    vector (all-nonnegative). Returns (vector, Rayleigh quotient of A).
    Edgeless graphs return (zeros, 0.0).
    """
    x = np.zeros(n, dtype=np.float64)
    if indices.shape[0] == 0:
        return x, 0.0
    inv = 1.0 / np.sqrt(n)
    for i in range(n):
        x[i] = inv
    y = np.empty(n, dtype=np.float64)
    for _ in range(max_iter):
        for i in range(n):
            acc = x[i]
            for ei in range(indptr[i], indptr[i + 1]):
                acc += x[indices[ei]]
            y[i] = 0.5 * acc
        norm = 0.0
        for i in range(n):
            norm += y[i] * y[i]
        norm = np.sqrt(norm)
        change = 0.0
        for i in range(n):
            yn = y[i] / norm
            diff = abs(yn - x[i])
            if diff > change:
                change = diff
            x[i] = yn
        if change < tol:
            break
    lam = 0.0
    for i in range(n):
        acc = 0.0
        for ei in range(indptr[i], indptr[i + 1]):
            acc += x[indices[ei]]
        lam += x[i] * acc
    return x, lam


@njit(cache=True)
def edges_present(indptr, indices, us, vs):
    """1 where the pair (us[i], vs[i]) is an edge, else 0."""
    m = us.shape[0]
    out = np.zeros(m, dtype=np.uint8)
    for i in range(m):
        u = us[i]
        v = vs[i]
        lo = indptr[u]
        hi = indptr[u + 1]
        while lo < hi:
            mid = (lo + hi) // 2
            if indices[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        if lo < indptr[u + 1] and indices[lo] == v:
            out[i] = 1
    return out


@njit(cache=True)
def flipped_class_rows(indptr, indices, deg_aug, labels, n_classes, target,
                       cand_u, cand_v, cand_present):
    """Per-class target row of the squared normalized adjacency after a flip.

    For each candidate flip (cand_u[i], cand_v[i]) — deletion when
    cand_present[i] else addition — recomputes, exactly, the target's row of
    D^-1/2 (A+I) D^-1/2 squared, aggregated per node label (one-hot class
    scores). deg_aug holds current degrees + 1. Output shape (ncand, K).
    """
    ncand = cand_u.shape[0]
    out = np.zeros((ncand, n_classes), dtype=np.float64)
    for c in range(ncand):
        u = cand_u[c]
        v = cand_v[c]
        delta = -1.0 if cand_present[c] == 1 else 1.0
        adding = cand_present[c] == 0
        du = deg_aug[u] + delta
        dv = deg_aug[v] + delta

        d_mu = deg_aug[target]
        if target == u:
            d_mu = du
        elif target == v:
            d_mu = dv
        wmu = 1.0 / np.sqrt(d_mu)

        # walk endpoints k in N'(target) + {target}
        nk = indptr[target + 1] - indptr[target]
        extra_k = -1
        if adding:
            if u == target:
                extra_k = v
            elif v == target:
                extra_k = u
        for kk in range(nk + 2):
            if kk < nk:
                k = indices[indptr[target] + kk]
                if not adding:
                    # deleted edge touching the target drops that neighbor
                    if (u == target and k == v) or (v == target and k == u):
                        continue
            elif kk == nk:
                k = target
            else:
                if extra_k < 0:
                    continue
                k = extra_k

            dk = deg_aug[k]
            if k == u:
                dk = du
            elif k == v:
                dk = dv
            wk = wmu / dk

            nj = indptr[k + 1] - indptr[k]
            extra_j = -1
            if adding:
                if k == u:
                    extra_j = v
                elif k == v:
                    extra_j = u
            for jj in range(nj + 2):
                if jj < nj:
                    j = indices[indptr[k] + jj]
                    if not adding:
                        if (k == u and j == v) or (k == v and j == u):
                            continue
                elif jj == nj:
                    j = k
                else:
                    if extra_j < 0:
                        continue
                    j = extra_j

                dj = deg_aug[j]
                if j == u:
                    dj = du
                elif j == v:
                    dj = dv
                out[c, labels[j]] += wk / np.sqrt(dj)
    return out


@njit(cache=True)
def warmup():
    return 0
