"""Ranking metrics over scored candidate pairs."""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import UndefinedMetricError


def _split(scored, labels=None):
    if labels is None:
        arr = np.asarray(scored, dtype=np.float64).reshape(-1, 2)
        scores, labels = arr[:, 0], arr[:, 1]
    else:
        scores = np.asarray(scored, dtype=np.float64).ravel()
        labels = np.asarray(labels, dtype=np.float64).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be 0 or 1")
    return scores, labels.astype(bool)


def auc(scored, labels=None) -> float:
    """Area under the ROC curve.

    Accepts either a sequence of ``(score, label)`` pairs or two parallel
    arrays. Equals the probability that a random positive outscores a random
    negative, ties counting one half.
    """
    scores, pos = _split(scored, labels)
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def aupr(scored, labels=None) -> float:
    """Area under the precision-recall curve, step-wise.

    Scores are swept in descending order; tied scores enter as one block, and
    each block adds ``(recall gain) * (precision after the block)``.
    """
    scores, pos = _split(scored, labels)
    n_pos = int(pos.sum())
    if n_pos == 0:
        raise UndefinedMetricError("AUPR needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    tp = np.cumsum(pos[order])
    # last index of every block of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp_b = tp[ends].astype(np.float64)
    precision = tp_b / (ends + 1)
    recall = tp_b / n_pos
    gain = np.diff(np.r_[0.0, recall])
    return float(np.sum(gain * precision))
