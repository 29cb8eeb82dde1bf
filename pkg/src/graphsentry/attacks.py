"""Structure-only attack rules driven by a linearized propagation surrogate.

All three attacks score single edge flips against the target row of
S = D^-1/2 (A+I) D^-1/2 squared, right-multiplied by a per-node class-score
matrix (one-hot labels in the pipeline). Degrees are self-loop augmented
(degree + 1) throughout. Tie-breaking is lexicographic on the normalized
(u, v) pair everywhere, so plans are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .graph import EdgeFlip, Graph, ego_subgraph

GRADARGMAX_DEFAULT_BUDGET = 2


def class_scores_from_labels(g: Graph) -> np.ndarray:
    """One-hot (n, class_count) score matrix from the node labels."""
    c = np.zeros((g.n, g.class_count), dtype=np.float64)
    c[np.arange(g.n), g.labels] = 1.0
    return c


def _check_scores(g: Graph, c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != g.n or c.shape[1] < 2:
        raise ValueError(f"class scores must be (n, K>=2), got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("class scores must be finite")
    return c


def surrogate_class_scores(g: Graph, c: np.ndarray, target: int) -> np.ndarray:
    """Target row of the squared normalized adjacency times the score matrix.

    Exact sparse evaluation over the target's 2-hop neighborhood; equals the
    dense matrix product row.
    """
    g._check_node(target)
    c = _check_scores(g, c)
    deg = g.degrees.astype(np.float64) + 1.0
    w_mu = 1.0 / np.sqrt(deg[target])
    ks = np.append(g.neighbors(target), target)
    js_parts = []
    w_parts = []
    for k in ks:
        js = np.append(g.neighbors(int(k)), int(k))
        js_parts.append(js)
        w_parts.append((w_mu / deg[k]) / np.sqrt(deg[js]))
    js = np.concatenate(js_parts)
    w = np.concatenate(w_parts)
    return w @ c[js]


def surrogate_argmax(g: Graph, target: int, c: np.ndarray | None = None) -> int:
    """Predicted class for target; ties resolve to the lowest class index."""
    if c is None:
        c = class_scores_from_labels(g)
    return int(np.argmax(surrogate_class_scores(g, c, target)))


def nettack_objective(g: Graph, c: np.ndarray, target: int, attack_class: int) -> float:
    """Class-score margin of attack_class over the target's own label.

    Sums (c[j, attack_class] - c[j, y_old]) weighted by the exact two-step
    propagation coefficient 1/sqrt(d_mu d_j) * sum over shared walk midpoints
    of 1/d_k, all degrees self-loop augmented.
    """
    c = _check_scores(g, c)
    y_old = g.label(target)
    if not (0 <= attack_class < c.shape[1]):
        raise ValueError(f"attack_class {attack_class} out of range")
    if attack_class == y_old:
        raise ValueError("attack_class must differ from the target's label")
    row = surrogate_class_scores(g, c, target)
    return float(row[attack_class] - row[y_old])


def flip_row_delta(g: Graph, c: np.ndarray, target: int, u: int, v: int) -> np.ndarray:
    """Exact change of the target's surrogate score row when (u, v) toggles."""
    action = "delete" if g.has_edge(u, v) else "add"
    flipped = g.apply_flips([EdgeFlip(u, v, action)])
    return surrogate_class_scores(flipped, c, target) - surrogate_class_scores(g, c, target)


def _softmax(x: np.ndarray) -> np.ndarray:
    z = np.exp(x - np.max(x))
    return z / z.sum()


def meta_gradient_proxy(g: Graph, c: np.ndarray, target: int, u: int, v: int) -> float:
    """First-order loss change of the target under toggling edge (u, v).

    (p - e_y) . delta_row with p the softmax of the target's current score
    row, e_y the one-hot true label, and delta_row the exact recomputed row
    change. Positive means the flip pushes the target's loss up.
    """
    c = _check_scores(g, c)
    p = _softmax(surrogate_class_scores(g, c, target))
    grad = p.copy()
    grad[g.label(target)] -= 1.0
    return float(grad @ flip_row_delta(g, c, target, u, v))


@dataclass(frozen=True)
class AttackPlan:
    """Ordered edge flips produced by one attack run on one target."""

    attack_name: str
    target: int
    budget: int
    flips: tuple[EdgeFlip, ...] = field(default_factory=tuple)
    scores: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.flips) > self.budget:
            raise ValueError("plan exceeds its budget")
        if len(self.flips) != len(self.scores):
            raise ValueError("one score per flip required")
        pairs = [(f.u, f.v) for f in self.flips]
        if len(set(pairs)) != len(pairs):
            raise ValueError("a node pair may appear at most once in a plan")


def default_budget(g: Graph, target: int) -> int:
    return max(1, g.degree(target))


def _checked_budget(g: Graph, target: int, budget: int | None) -> int:
    if budget is None:
        return default_budget(g, target)
    if int(budget) < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    return int(budget)


def _flip_candidate_rows(g: Graph, target: int, cu: np.ndarray, cv: np.ndarray,
                         present: np.ndarray) -> np.ndarray:
    deg_aug = (g.degrees + 1).astype(np.float64)
    return _kernels.flipped_class_rows(
        g.indptr, g.indices, deg_aug, g.labels.astype(np.int32),
        g.class_count, target,
        cu.astype(np.int32), cv.astype(np.int32), present.astype(np.uint8))


def attack_nettack(g: Graph, target: int, budget: int | None = None) -> AttackPlan:
    """Greedy margin attack: flips incident to the target, best class margin.

    Each step scores every unused flip (target, v) by the post-flip margin
    maximized over wrong classes and applies the best strictly improving
    one; stops early when nothing improves. Default budget is the target's
    clean degree (at least 1).
    """
    g._check_node(target)
    budget = _checked_budget(g, target, budget)
    y_old = g.label(target)
    c = class_scores_from_labels(g)
    cur = g
    flips: list[EdgeFlip] = []
    scores: list[float] = []
    used: set[tuple[int, int]] = set()
    for _ in range(budget):
        vs = np.arange(g.n, dtype=np.int64)
        vs = vs[vs != target]
        cu = np.minimum(vs, target)
        cv = np.maximum(vs, target)
        keep = np.array([(int(a), int(b)) not in used for a, b in zip(cu, cv)])
        if not keep.any():
            break
        cu, cv, vs = cu[keep], cv[keep], vs[keep]
        present = np.isin(vs, cur.neighbors(target))

        rows = _flip_candidate_rows(cur, target, cu, cv, present)
        margins = rows - rows[:, y_old:y_old + 1]
        margins[:, y_old] = -np.inf
        cand_scores = margins.max(axis=1)

        cur_row = surrogate_class_scores(cur, c, target)
        cur_margin = cur_row - cur_row[y_old]
        cur_margin[y_old] = -np.inf
        cur_best = float(cur_margin.max())

        best = int(np.argmax(cand_scores))  # candidates are in (u, v) order
        if not cand_scores[best] > cur_best:
            break
        action = "delete" if present[best] else "add"
        flip = EdgeFlip(int(cu[best]), int(cv[best]), action)
        cur = cur.apply_flips([flip])
        used.add((flip.u, flip.v))
        flips.append(flip)
        scores.append(float(cand_scores[best]))
    return AttackPlan("nettack", target, budget, tuple(flips), tuple(scores))


def _local_candidate_pairs(g: Graph, target: int) -> np.ndarray:
    """Unordered pairs with at least one endpoint within 2 hops of target."""
    ball = ego_subgraph(g, target, radius=2).members.astype(np.int64)
    everyone = np.arange(g.n, dtype=np.int64)
    a = np.repeat(ball, g.n)
    b = np.tile(everyone, ball.shape[0])
    mask = a != b
    lo = np.minimum(a[mask], b[mask])
    hi = np.maximum(a[mask], b[mask])
    return np.unique(np.stack([lo, hi], axis=1), axis=0)


def _global_candidate_pairs(g: Graph) -> np.ndarray:
    lo, hi = np.triu_indices(g.n, k=1)
    return np.stack([lo.astype(np.int64), hi.astype(np.int64)], axis=1)


def attack_meta(g: Graph, target: int, budget: int | None = None,
                candidates: str = "local") -> AttackPlan:
    """Greedy first-order loss attack over single edge flips.

    Candidates are node pairs touching the target's 2-hop neighborhood (the
    exact support of the target-row change; candidates="global" searches all
    pairs instead). Each step applies the flip with the largest positive
    proxy and stops when none remains. Default budget as attack_nettack.
    """
    g._check_node(target)
    if candidates not in ("local", "global"):
        raise ValueError(f"candidates must be 'local' or 'global', got {candidates!r}")
    budget = _checked_budget(g, target, budget)
    y_star = g.label(target)
    c = class_scores_from_labels(g)
    cur = g
    flips: list[EdgeFlip] = []
    scores: list[float] = []
    used: set[tuple[int, int]] = set()
    for _ in range(budget):
        pairs = (_local_candidate_pairs(cur, target) if candidates == "local"
                 else _global_candidate_pairs(cur))
        if used:
            keys = pairs[:, 0] * g.n + pairs[:, 1]
            used_keys = np.array([a * g.n + b for a, b in used], dtype=np.int64)
            pairs = pairs[~np.isin(keys, used_keys)]
        if pairs.shape[0] == 0:
            break
        cu = pairs[:, 0]
        cv = pairs[:, 1]
        present = _kernels.edges_present(cur.indptr, cur.indices,
                                         cu.astype(np.int32), cv.astype(np.int32))

        row = surrogate_class_scores(cur, c, target)
        grad = _softmax(row)
        grad[y_star] -= 1.0
        rows = _flip_candidate_rows(cur, target, cu, cv, present)
        proxies = (rows - row[None, :]) @ grad

        best = int(np.argmax(proxies))  # pairs are lexicographically sorted
        if not proxies[best] > 0.0:
            break
        action = "delete" if present[best] else "add"
        flip = EdgeFlip(int(cu[best]), int(cv[best]), action)
        cur = cur.apply_flips([flip])
        used.add((flip.u, flip.v))
        flips.append(flip)
        scores.append(float(proxies[best]))
    return AttackPlan("meta", target, budget, tuple(flips), tuple(scores))


def attack_gradargmax(g: Graph, target: int,
                      budget: int = GRADARGMAX_DEFAULT_BUDGET) -> AttackPlan:
    """Degree-guided deletion attack inside the target's 2-hop subgraph.

    Deletes up to budget induced edges in increasing sqrt(d_u * d_v) of
    their self-loop-augmented degrees (the largest-magnitude entries of the
    normalized adjacency), recomputing the subgraph and the degrees after
    each deletion. Records 1/sqrt(d_u * d_v) as the flip score.
    """
    g._check_node(target)
    if int(budget) < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    cur = g
    flips: list[EdgeFlip] = []
    scores: list[float] = []
    for _ in range(int(budget)):
        sub = ego_subgraph(cur, target, radius=2)
        edges = sub.edges_global()
        if not edges:
            break
        deg_aug = cur.degrees + 1
        products = np.array([int(deg_aug[u]) * int(deg_aug[v]) for u, v in edges],
                            dtype=np.int64)
        best = int(np.argmin(products))  # edges_global is lexicographically sorted
        u, v = edges[best]
        flips.append(EdgeFlip(u, v, "delete"))
        scores.append(float(1.0 / np.sqrt(products[best])))
        cur = cur.apply_flips([flips[-1]])
    return AttackPlan("gradargmax", target, int(budget), tuple(flips), tuple(scores))


ATTACKS: dict[str, Callable[..., AttackPlan]] = {
    "nettack": attack_nettack,
    "meta": attack_meta,
    "gradargmax": attack_gradargmax,
}


def run_attack(g: Graph, name: str, target: int, budget: int | None = None) -> AttackPlan:
    """Dispatch by attack name with each attack's own default budget."""
    if name not in ATTACKS:
        raise ValueError(f"unknown attack {name!r}; known: {sorted(ATTACKS)}")
    if name == "gradargmax":
        return attack_gradargmax(g, target,
                                 GRADARGMAX_DEFAULT_BUDGET if budget is None else budget)
    return ATTACKS[name](g, target, budget)


def plan_succeeds(g: Graph, plan: AttackPlan) -> bool:
    """True when the surrogate argmax of the target row changes under the plan."""
    before = surrogate_argmax(g, plan.target)
    after = surrogate_argmax(g.apply_flips(plan.flips), plan.target)
    return before != after


def plan_lines(plan: AttackPlan) -> list[str]:
    """One 'attack_name target u v action score' line per flip."""
    return [f"{plan.attack_name} {plan.target} {f.u} {f.v} {f.action} {s!r}"
            for f, s in zip(plan.flips, plan.scores)]


def plan_summary(plan: AttackPlan, success: bool) -> dict:
    return {
        "attack": plan.attack_name,
        "target": plan.target,
        "budget": plan.budget,
        "flip_count": len(plan.flips),
        "success": bool(success),
    }


def write_plans(handle, plans: Sequence[AttackPlan]) -> None:
    for plan in plans:
        for line in plan_lines(plan):
            handle.write(line + "\n")
