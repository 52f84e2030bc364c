"""Unit tests for ROC/AUC metrics, with a brute-force pairwise oracle."""

from __future__ import annotations

import numpy as np
import pytest

from fedmia.metrics import RocCurve, accuracy, auc, roc_curve, tpr_at_fpr


def brute_force_auc(members: np.ndarray, nonmembers: np.ndarray) -> float:
    """Mann-Whitney by explicit pair enumeration, ties worth half."""
    twice_wins = 0
    for m in members:
        for n in nonmembers:
            if m > n:
                twice_wins += 2
            elif m == n:
                twice_wins += 1
    return twice_wins / (2 * len(members) * len(nonmembers))


def test_roc_curve_hand_example():
    scores = np.array([0.9, 0.8, 0.85, 0.7])
    is_member = np.array([True, True, False, False])
    curve = roc_curve(scores, is_member)
    assert np.array_equal(curve.thresholds, [np.inf, 0.9, 0.85, 0.8, 0.7])
    assert np.array_equal(curve.fpr, [0.0, 0.0, 0.5, 0.5, 1.0])
    assert np.array_equal(curve.tpr, [0.0, 0.5, 0.5, 1.0, 1.0])
    assert auc(scores, is_member) == 0.75


def test_roc_curve_ties_move_together():
    # one member and one non-member share a score: no corner between them
    scores = np.array([0.5, 0.5, 0.1])
    is_member = np.array([True, False, False])
    curve = roc_curve(scores, is_member)
    assert np.array_equal(curve.fpr, [0.0, 0.5, 1.0])
    assert np.array_equal(curve.tpr, [0.0, 1.0, 1.0])
    assert auc(scores, is_member) == brute_force_auc([0.5], [0.5, 0.1])


def test_roc_curve_shape_properties():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = rng.integers(2, 60)
        scores = np.round(rng.normal(size=n), 1)  # coarse grid forces ties
        is_member = rng.random(n) < 0.5
        is_member[0], is_member[1] = True, False  # both classes present
        curve = roc_curve(scores, is_member)
        assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
        assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0
        assert (np.diff(curve.fpr) >= 0).all()
        assert (np.diff(curve.tpr) >= 0).all()
        assert (np.diff(curve.thresholds) < 0).all()


@pytest.mark.parametrize("seed", range(10))
def test_auc_equals_pairwise_exactly(seed):
    rng = np.random.default_rng(seed)
    n_m = int(rng.integers(1, 40))
    n_n = int(rng.integers(1, 40))
    # quantized scores so ties actually occur
    members = np.round(rng.normal(size=n_m), 1)
    nonmembers = np.round(rng.normal(size=n_n), 1)
    scores = np.concatenate([members, nonmembers])
    is_member = np.concatenate([np.ones(n_m, bool), np.zeros(n_n, bool)])
    assert auc(scores, is_member) == brute_force_auc(members, nonmembers)


def test_auc_extremes():
    scores = np.array([1.0, 0.9, 0.2, 0.1])
    is_member = np.array([True, True, False, False])
    assert auc(scores, is_member) == 1.0
    assert auc(scores, ~is_member) == 0.0
    tied = np.full(6, 3.3)
    assert auc(tied, np.array([1, 0, 1, 0, 1, 0], bool)) == 0.5


def test_roc_rejects_degenerate_inputs():
    with pytest.raises(ValueError):
        roc_curve(np.array([1.0, 2.0]), np.array([True, True]))
    with pytest.raises(ValueError):
        auc(np.array([1.0, 2.0]), np.array([False, False]))
    with pytest.raises(ValueError):
        roc_curve(np.array([np.nan, 1.0]), np.array([True, False]))
    with pytest.raises(ValueError):
        roc_curve(np.array([1.0, 2.0]), np.array([True]))


def test_tpr_at_fpr_step_semantics():
    curve = roc_curve(
        np.array([0.9, 0.8, 0.85, 0.7]), np.array([True, True, False, False])
    )
    assert tpr_at_fpr(curve, 0.0) == 0.5  # achieved exactly at fpr 0
    assert tpr_at_fpr(curve, 0.3) == 0.5  # no point between 0 and 0.5: stay
    assert tpr_at_fpr(curve, 0.5) == 1.0
    assert tpr_at_fpr(curve, 1.0) == 1.0


def test_tpr_at_fpr_no_interpolation():
    # single threshold jumps straight to (1, 1): below it only (0, 0) counts
    curve = roc_curve(np.array([0.5, 0.5]), np.array([True, False]))
    assert tpr_at_fpr(curve, 0.999) == 0.0
    assert tpr_at_fpr(curve, 1.0) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_tpr_at_fpr_monotone_in_target(seed):
    rng = np.random.default_rng(100 + seed)
    scores = np.round(rng.normal(size=50), 1)
    is_member = rng.random(50) < 0.4
    is_member[:2] = [True, False]
    curve = roc_curve(scores, is_member)
    targets = np.sort(rng.random(20))
    values = [tpr_at_fpr(curve, t) for t in targets]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 for v in values)


def test_tpr_at_fpr_rejects_bad_target():
    curve = RocCurve(np.array([np.inf, 1.0]), np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        tpr_at_fpr(curve, -0.1)
    with pytest.raises(ValueError):
        tpr_at_fpr(curve, 1.1)


def test_accuracy_hand_and_errors():
    assert accuracy(np.array([1, 2, 3, 4]), np.array([1, 2, 0, 4])) == 0.75
    with pytest.raises(ValueError):
        accuracy(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        accuracy(np.array([1, 2]), np.array([1]))
