"""Detection metrics: rank-based AUC, precision, and relative gain."""

from __future__ import annotations

import numpy as np


def auc_score(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie).

    Computed from midranks, which equals the pairwise definition exactly,
    ties included. Raises when either class is absent.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise ValueError("scores and labels must be equal-length 1-D sequences")
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be binary 0/1")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes must be present to compute AUC")

    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < sorted_scores.shape[0]:
        j = i
        while j + 1 < sorted_scores.shape[0] and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # 1-based midrank shared across the tie block
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = float(np.sum(ranks[labels == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def precision_score(tp: int, fp: int) -> float | None:
    """tp / (tp + fp); None when no positive predictions exist."""
    tp = int(tp)
    fp = int(fp)
    if tp < 0 or fp < 0:
        raise ValueError("counts must be non-negative")
    if tp + fp == 0:
        return None
    return tp / (tp + fp)


def relative_gain(m_all: float, m_top: float) -> float:
    """Percentage change of the all-attribute metric over the top-k metric."""
    m_all = float(m_all)
    m_top = float(m_top)
    if m_top <= 0:
        raise ValueError(f"m_top must be positive, got {m_top}")
    return (m_all - m_top) / m_top * 100.0
