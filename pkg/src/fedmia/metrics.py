"""ROC construction, AUC, and low-FPR operating points for attack scores.

Ties are handled by moving tied scores across the threshold together, so
the trapezoid AUC equals the Mann-Whitney pair count (ties worth half)
exactly, not just to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RocCurve:
    """Operating points swept from the highest score downward.

    Starts at (0, 0) with threshold +inf and always ends at (1, 1).
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray


def _split_scores(scores: np.ndarray, is_member: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    is_member = np.asarray(is_member, dtype=bool)
    if scores.shape != is_member.shape or scores.ndim != 1:
        raise ValueError("scores and is_member must be matching 1-d arrays")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    members = scores[is_member]
    nonmembers = scores[~is_member]
    if members.size == 0 or nonmembers.size == 0:
        raise ValueError("need at least one member and one non-member score")
    return members, nonmembers


def _cumulative_counts(
    members: np.ndarray, nonmembers: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct thresholds (descending) with counts of scores >= each."""
    thresholds = np.unique(np.concatenate([members, nonmembers]))[::-1]
    sorted_m = np.sort(members)
    sorted_n = np.sort(nonmembers)
    tp = members.size - np.searchsorted(sorted_m, thresholds, side="left")
    fp = nonmembers.size - np.searchsorted(sorted_n, thresholds, side="left")
    return thresholds, tp, fp


def roc_curve(scores: np.ndarray, is_member: np.ndarray) -> RocCurve:
    """ROC points at every distinct score, higher score = more member-like."""
    members, nonmembers = _split_scores(scores, is_member)
    thresholds, tp, fp = _cumulative_counts(members, nonmembers)
    return RocCurve(
        thresholds=np.concatenate([[np.inf], thresholds]),
        fpr=np.concatenate([[0.0], fp / nonmembers.size]),
        tpr=np.concatenate([[0.0], tp / members.size]),
    )


def auc(scores: np.ndarray, is_member: np.ndarray) -> float:
    """Area under the ROC, computed from integer counts.

    Equivalent to the probability a random member outscores a random
    non-member, with ties counted half; the integer accumulation makes
    the trapezoid sum and the pairwise definition agree bit for bit.
    """
    members, nonmembers = _split_scores(scores, is_member)
    _, tp, fp = _cumulative_counts(members, nonmembers)
    tp = np.concatenate([[0], tp]).astype(np.int64)
    fp = np.concatenate([[0], fp]).astype(np.int64)
    twice_area = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    return twice_area / (2 * members.size * nonmembers.size)


def tpr_at_fpr(curve: RocCurve, target_fpr: float) -> float:
    """TPR at the largest achieved FPR <= target; a step function, no interpolation."""
    if not 0.0 <= target_fpr <= 1.0:
        raise ValueError("target_fpr must lie in [0, 1]")
    # fpr is non-decreasing and tpr non-decreasing along it, so the last
    # admissible index carries the best achievable TPR.
    idx = int(np.searchsorted(curve.fpr, target_fpr, side="right")) - 1
    return float(curve.tpr[idx])


def accuracy(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of exact label matches."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise ValueError("predictions and labels must be matching 1-d arrays")
    if predictions.size == 0:
        raise ValueError("need at least one prediction")
    return float(np.mean(predictions == labels))
