"""Black-box membership inference scores over prediction vectors.

Every attack sees a model only through a prediction callable; nothing in
this module touches weights.  Higher score always means more member-like,
so one ROC convention covers all three attacks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from fedmia.network import PROB_FLOOR

ATTACK_TAGS = ("entropy", "mentr", "lira")

# Emitted when no shadow trained on the sample: the IN fit has no
# evidence at all, so the sample ranks at the very bottom.
LIRA_NO_IN_SENTINEL = -1e30

PredictFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class AttackScoreSet:
    """Scores for a batch of samples plus their ground-truth membership."""

    attack: str
    sample_ids: np.ndarray
    scores: np.ndarray
    is_member: np.ndarray

    def __post_init__(self) -> None:
        self.sample_ids = np.asarray(self.sample_ids, dtype=np.int64)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.is_member = np.asarray(self.is_member, dtype=bool)
        if not (self.sample_ids.shape == self.scores.shape == self.is_member.shape):
            raise ValueError("sample_ids, scores and is_member must align")


@dataclass(frozen=True)
class GaussianStats:
    """Mean and variance of a 1-d score population."""

    mean: float
    var: float

    def __post_init__(self) -> None:
        if self.var <= 0:
            raise ValueError("variance must be positive")

    def logpdf(self, value: float) -> float:
        return -0.5 * np.log(2.0 * np.pi * self.var) - (value - self.mean) ** 2 / (2.0 * self.var)


def _check_prob_rows(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    rows = np.atleast_2d(probs)
    if rows.ndim != 2:
        raise ValueError("probabilities must be a vector or matrix")
    if (rows < 0).any() or np.abs(rows.sum(axis=1) - 1.0).max() > 1e-6:
        raise ValueError("rows must be probability vectors (sum 1 within 1e-6)")
    return rows


def _entropy_rows(probs: np.ndarray) -> np.ndarray:
    rows = _check_prob_rows(probs)
    logs = np.log(np.where(rows > 0, rows, 1.0))  # 0 * log 0 := 0
    return (rows * logs).sum(axis=1)


def _label_rows(probs: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    if labels.shape != (rows.shape[0],):
        raise ValueError("need one label per probability row")
    if labels.size and (labels.min() < 0 or labels.max() >= rows.shape[1]):
        raise ValueError(f"labels must lie in [0, {rows.shape[1]})")
    return rows, labels.astype(np.int64)


def _mentr_rows(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    rows, labels = _label_rows(probs, labels)
    idx = np.arange(rows.shape[0])
    p_true = rows[idx, labels]
    log_true = np.log(np.clip(p_true, PROB_FLOOR, 1.0 - PROB_FLOOR))
    log_rest = np.log(np.clip(1.0 - rows, PROB_FLOOR, 1.0 - PROB_FLOOR))
    cross = (rows * log_rest).sum(axis=1) - p_true * log_rest[idx, labels]
    modified_entropy = -(1.0 - p_true) * log_true - cross
    return -modified_entropy


def _logit_rows(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    rows, labels = _label_rows(probs, labels)
    p_true = np.clip(rows[np.arange(rows.shape[0]), labels], PROB_FLOOR, 1.0 - PROB_FLOOR)
    return np.log(p_true) - np.log1p(-p_true)


def entropy_scores(probs: np.ndarray) -> np.ndarray:
    """Negative Shannon entropy per row; confident rows score near 0."""
    return _entropy_rows(probs)


def mentr_scores(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Batch counterpart of mentr_score."""
    return _mentr_rows(probs, labels)


def logit_confidences(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Batch counterpart of logit_confidence."""
    return _logit_rows(probs, labels)


def entropy_score(probs: np.ndarray) -> float:
    """Negative Shannon entropy of one prediction; confident rows score near 0."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("entropy_score expects a single probability vector")
    return float(_entropy_rows(probs)[0])


def mentr_score(probs: np.ndarray, label: int) -> float:
    """Negated modified entropy: mixes confidence on the true class with
    confusion mass on the others, clamped before every log."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("mentr_score expects a single probability vector")
    return float(_mentr_rows(probs, np.array([label]))[0])


def logit_confidence(probs: np.ndarray, label: int) -> float:
    """log(p_y / (1 - p_y)) with p_y clamped away from 0 and 1."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("logit_confidence expects a single probability vector")
    return float(_logit_rows(probs, np.array([label]))[0])


def fit_gaussian(values: np.ndarray) -> GaussianStats:
    """Mean and unbiased variance, floored at 1e-12; one value gets the floor."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("need at least one value")
    var = float(np.var(values, ddof=1)) if values.size >= 2 else 0.0
    return GaussianStats(float(values.mean()), max(var, 1e-12))


def lira_score(phi: float, in_stats: GaussianStats, out_stats: GaussianStats) -> float:
    """Gaussian log-density ratio of the confidence under IN vs OUT fits."""
    return float(in_stats.logpdf(phi) - out_stats.logpdf(phi))


def _lira_one(phi_target: float, shadow_phis: np.ndarray, in_mask: np.ndarray) -> float:
    in_vals = shadow_phis[in_mask]
    out_vals = shadow_phis[~in_mask]
    if out_vals.size == 0:
        # membership in shadows says nothing about the target, so a sample
        # that no shadow held out simply cannot be calibrated
        return np.nan
    if in_vals.size == 0:
        return LIRA_NO_IN_SENTINEL
    if in_vals.size >= 2 and out_vals.size >= 2:
        return lira_score(phi_target, fit_gaussian(in_vals), fit_gaussian(out_vals))
    # one side too thin for its own variance: share the spread of all shadows
    pooled = max(float(np.var(shadow_phis, ddof=1)), 1e-12)
    return lira_score(
        phi_target,
        GaussianStats(float(in_vals.mean()), pooled),
        GaussianStats(float(out_vals.mean()), pooled),
    )


def lira_scores_from_phis(
    phi_targets: np.ndarray, shadow_phis: np.ndarray, in_mask: np.ndarray
) -> np.ndarray:
    """Score each sample from precomputed confidences.

    phi_targets has one entry per sample; shadow_phis and in_mask are
    (num_shadows, num_samples) with in_mask flagging shadows that trained
    on the sample.  A sample no shadow held out gets nan: with few splits
    such samples exist by chance and carry no calibration signal.
    """
    phi_targets = np.asarray(phi_targets, dtype=np.float64)
    shadow_phis = np.asarray(shadow_phis, dtype=np.float64)
    in_mask = np.asarray(in_mask, dtype=bool)
    if shadow_phis.ndim != 2 or shadow_phis.shape != in_mask.shape:
        raise ValueError("shadow_phis and in_mask must be matching 2-d arrays")
    if shadow_phis.shape[1] != phi_targets.shape[0]:
        raise ValueError("need shadow confidences for every sample")
    if shadow_phis.shape[0] < 2:
        raise ValueError("need at least two shadow models")
    return np.array(
        [
            _lira_one(phi_targets[s], shadow_phis[:, s], in_mask[:, s])
            for s in range(phi_targets.shape[0])
        ]
    )


@dataclass
class ShadowContext:
    """Everything the likelihood-ratio attack may see about the other models.

    predict_fns are black-box callables (one per trained model, target
    included at its own index); member_sets hold the sample ids each
    model trained on.
    """

    target_index: int
    predict_fns: Sequence[PredictFn]
    member_sets: Sequence[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.predict_fns) != len(self.member_sets):
            raise ValueError("one member set per predict fn required")
        if not 0 <= self.target_index < len(self.predict_fns):
            raise ValueError("target_index out of range")
        if len(self.predict_fns) < 3:
            raise ValueError("lira needs at least two shadow models besides the target")


def run_lira(
    target_index: int,
    x: np.ndarray,
    label: int,
    sample_id: int,
    predict_fns: Sequence[PredictFn],
    member_sets: Sequence[np.ndarray],
) -> float:
    """Likelihood-ratio score for one sample against one target model."""
    ctx = ShadowContext(target_index, predict_fns, member_sets)
    row = np.atleast_2d(np.asarray(x, dtype=np.float64))
    labels = np.array([label])
    phi_target = _logit_rows(predict_fns[target_index](row), labels)[0]
    shadow_idx = [j for j in range(len(predict_fns)) if j != target_index]
    shadow_phis = np.array(
        [_logit_rows(ctx.predict_fns[j](row), labels)[0] for j in shadow_idx]
    )
    in_mask = np.array([np.isin(sample_id, member_sets[j]) for j in shadow_idx], dtype=bool)
    score = _lira_one(phi_target, shadow_phis, in_mask)
    if np.isnan(score):
        raise ValueError("sample was a member for every shadow model")
    return score


def run_attack(
    tag: str,
    predict_fn: PredictFn,
    member_X: np.ndarray,
    member_y: np.ndarray,
    nonmember_X: np.ndarray,
    nonmember_y: np.ndarray,
    member_ids: np.ndarray | None = None,
    nonmember_ids: np.ndarray | None = None,
    shadow: ShadowContext | None = None,
) -> AttackScoreSet:
    """Score members and non-members of one model under one attack.

    predict_fn is the only access to the attacked model.  The lira tag
    additionally needs a ShadowContext; its shadow confidences come from
    each shadow's own predict fn, never from the target's.
    """
    if tag not in ATTACK_TAGS:
        raise ValueError(f"unknown attack {tag!r}, expected one of {ATTACK_TAGS}")
    member_X = np.atleast_2d(np.asarray(member_X, dtype=np.float64))
    nonmember_X = np.atleast_2d(np.asarray(nonmember_X, dtype=np.float64))
    if member_X.shape[0] == 0 or nonmember_X.shape[0] == 0:
        raise ValueError("need at least one member and one non-member sample")

    x_all = np.vstack([member_X, nonmember_X])
    y_all = np.concatenate([np.asarray(member_y), np.asarray(nonmember_y)]).astype(np.int64)
    n_member = member_X.shape[0]
    if member_ids is None:
        member_ids = np.arange(n_member)
    if nonmember_ids is None:
        nonmember_ids = np.arange(n_member, n_member + nonmember_X.shape[0])
    ids = np.concatenate([np.asarray(member_ids), np.asarray(nonmember_ids)]).astype(np.int64)
    if ids.shape != (x_all.shape[0],) or y_all.shape != (x_all.shape[0],):
        raise ValueError("ids and labels must match the sample count")

    probs = _check_prob_rows(predict_fn(x_all))
    if tag == "entropy":
        scores = _entropy_rows(probs)
    elif tag == "mentr":
        scores = _mentr_rows(probs, y_all)
    else:
        if shadow is None:
            raise ValueError("lira requires a ShadowContext")
        phi_targets = _logit_rows(probs, y_all)
        shadow_idx = [j for j in range(len(shadow.predict_fns)) if j != shadow.target_index]
        shadow_phis = np.array(
            [_logit_rows(shadow.predict_fns[j](x_all), y_all) for j in shadow_idx]
        )
        in_mask = np.array([np.isin(ids, shadow.member_sets[j]) for j in shadow_idx])
        scores = lira_scores_from_phis(phi_targets, shadow_phis, in_mask)
        if np.isnan(scores).any():
            raise ValueError("some samples were members for every shadow model")

    is_member = np.concatenate(
        [np.ones(n_member, dtype=bool), np.zeros(nonmember_X.shape[0], dtype=bool)]
    )
    return AttackScoreSet(tag, ids, scores, is_member)
