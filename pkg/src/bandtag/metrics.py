"""Evaluation metrics: ROC-AUC, accuracy, rank comparison of group importances."""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateError, DimensionMismatch, EmptyInput, MismatchedGroups


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney U statistic.

    Tied scores share their average rank, so every tied positive/negative
    pair counts one half.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise DimensionMismatch(f"{scores.size} scores for {labels.size} labels")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateError("AUC needs at least one positive and one negative label")
    ranks = rankdata(scores)  # average ranks for ties
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def macro_auc(scores, labels, average="macro"):
    """Mean per-tag AUC over tags that have both classes.

    Parameters
    ----------
    scores, labels : ndarray, shape (N, T)
    average : {"macro", "micro"}
        ``"micro"`` pools every (row, tag) cell into one ranking.

    Returns
    -------
    auc : float
    skipped : int
        Number of tags left out because their labels were constant.
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    labels = np.atleast_2d(np.asarray(labels))
    if scores.shape != labels.shape:
        raise DimensionMismatch(f"scores {scores.shape} vs labels {labels.shape}")
    per_tag = []
    skipped = 0
    for t in range(labels.shape[1]):
        col = labels[:, t]
        if col.min() == col.max():
            skipped += 1
            continue
        per_tag.append(roc_auc(scores[:, t], col))
    if average == "micro":
        return roc_auc(scores.ravel(), labels.ravel()), skipped
    if average != "macro":
        raise ValueError(f"unknown average {average!r}")
    if not per_tag:
        raise DegenerateError("no tag has both positive and negative labels")
    return float(np.mean(per_tag)), skipped


def per_tag_auc(scores, labels):
    """AUC per column, ``None`` where the column's labels are constant."""
    out = []
    for t in range(labels.shape[1]):
        col = labels[:, t]
        out.append(None if col.min() == col.max() else roc_auc(scores[:, t], col))
    return out


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted).ravel()
    truth = np.asarray(truth).ravel()
    if predicted.size == 0:
        raise EmptyInput("accuracy of an empty prediction")
    if predicted.shape != truth.shape:
        raise DimensionMismatch(f"{predicted.size} predictions for {truth.size} labels")
    return float(np.mean(predicted == truth))


def importances_to_ranks(importances, group_names: Sequence[str]) -> dict:
    """Rank 1 goes to the largest importance; ties keep declaration order."""
    importances = np.asarray(importances, dtype=float)
    if len(group_names) != importances.size:
        raise DimensionMismatch("one name per importance required")
    order = np.argsort(-importances, kind="stable")
    ranks = {}
    for r, j in enumerate(order, start=1):
        ranks[group_names[j]] = r
    return {g: ranks[g] for g in group_names}


def check_ranks(ranks: Mapping[str, int]):
    if sorted(ranks.values()) != list(range(1, len(ranks) + 1)):
        raise ValueError(f"ranks must be a permutation of 1..{len(ranks)}: {dict(ranks)}")


def rank_abs_distance(a: Mapping[str, int], b: Mapping[str, int]) -> int:
    """Sum over groups of the absolute rank difference."""
    if set(a) != set(b):
        raise MismatchedGroups(
            f"group sets differ: only in first {sorted(set(a) - set(b))}, "
            f"only in second {sorted(set(b) - set(a))}"
        )
    check_ranks(a)
    check_ranks(b)
    return int(sum(abs(int(a[g]) - int(b[g])) for g in a))


def uniformity_gap(importances) -> float:
    """Largest deviation of any importance from the uniform value 1/J."""
    importances = np.asarray(importances, dtype=float)
    return float(np.max(np.abs(importances - 1.0 / importances.size)))
