"""Repeated-split experiment protocol with a black-box model boundary.

For each of S random member/non-member splits one model population is
trained; every requested attack then scores every base sample against
every model, using the remaining S-1 models as shadows where needed.
Attack code only ever sees ModelHandle objects, which expose prediction
and run metadata, never parameters.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from fedmia.attacks import (
    ATTACK_TAGS,
    entropy_scores,
    lira_scores_from_phis,
    logit_confidences,
    mentr_scores,
)
from fedmia.datasets import Dataset
from fedmia.federation import DEFAULT_TAU, RoundConfig, TrainedEnsemble, run_strategy
from fedmia.metrics import RocCurve, accuracy, auc, roc_curve, tpr_at_fpr
from fedmia.network import Architecture
from fedmia.seeding import derive_seed

# split_index used for the row averaging each attack over all splits
MEAN_SPLIT_INDEX = -1

# row label for attacks on the server-side aggregated model
AGGREGATE_SUFFIX = "+agg"

# seed namespaces, so plan sampling never shares a stream with training
_PLAN_NS = 0
_TRAIN_NS = 1


@dataclass
class SplitPlan:
    """One random partition of the base set and its client shards."""

    split_index: int
    member_ids: np.ndarray
    nonmember_ids: np.ndarray
    client_shards: list[np.ndarray]

    def validate(self, base_size: int) -> None:
        members = set(self.member_ids.tolist())
        nonmembers = set(self.nonmember_ids.tolist())
        if members & nonmembers:
            raise ValueError("member and non-member sets overlap")
        if len(members) + len(nonmembers) != base_size or len(members | nonmembers) != base_size:
            raise ValueError("split does not cover the base set")
        sharded = np.concatenate(self.client_shards)
        if sorted(sharded.tolist()) != sorted(self.member_ids.tolist()):
            raise ValueError("client shards must partition the member set")
        sizes = [len(s) for s in self.client_shards]
        if max(sizes) - min(sizes) > 1:
            raise ValueError("client shards must be balanced within one sample")


def make_splits(
    base_size: int,
    num_splits: int,
    member_fraction: float,
    num_clients: int,
    seed: int,
) -> list[SplitPlan]:
    """S independent uniform member/non-member partitions, seeded."""
    if num_splits < 2:
        raise ValueError("need at least two splits")
    if not 0.0 < member_fraction < 1.0:
        raise ValueError("member_fraction must lie strictly between 0 and 1")
    if base_size < 2 * num_clients:
        raise ValueError("base set too small for the client count")
    n_member = int(round(member_fraction * base_size))
    if n_member < num_clients or n_member >= base_size:
        raise ValueError(
            f"member_fraction {member_fraction} leaves {n_member} members for "
            f"{num_clients} clients out of {base_size} samples"
        )
    plans = []
    for i in range(num_splits):
        rng = np.random.default_rng(derive_seed(seed, _PLAN_NS, i))
        order = rng.permutation(base_size)
        members = order[:n_member]
        shards = [np.sort(shard) for shard in np.array_split(members, num_clients)]
        plan = SplitPlan(i, np.sort(members), np.sort(order[n_member:]), shards)
        plan.validate(base_size)
        plans.append(plan)
    return plans


class ModelHandle:
    """Prediction-only view of one trained model population.

    The training side hands attacks this object and nothing else; its
    public surface is prediction methods plus run metadata, so weights
    cannot leak into attack code.
    """

    __slots__ = ("split_index", "strategy", "comm_bytes", "seed", "num_views", "has_aggregate", "_ensemble")

    def __init__(self, split_index: int, ensemble: TrainedEnsemble, seed: int) -> None:
        self.split_index = split_index
        self.strategy = ensemble.strategy
        self.comm_bytes = ensemble.ledger.total_bytes
        self.seed = seed
        self.num_views = ensemble.num_views
        self.has_aggregate = ensemble.has_aggregate
        self._ensemble = ensemble

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Canonical output: mean class probabilities over client views."""
        return self._ensemble.predict_proba(x)

    def predict_proba_per_client(self, x: np.ndarray) -> np.ndarray:
        """(views, samples, classes) probabilities, one view per client."""
        return self._ensemble.predict_proba_views(x)

    def predict_proba_aggregate(self, x: np.ndarray) -> np.ndarray:
        """Probabilities of the aggregated server model, where one exists."""
        return self._ensemble.predict_proba_aggregate(x)


def train_model(
    plan: SplitPlan,
    cfg: RoundConfig,
    dataset: Dataset,
    arch: Architecture,
    seed: int,
    tau: float = DEFAULT_TAU,
) -> ModelHandle:
    """Train one model population on the plan's member set."""
    x = dataset.features[plan.member_ids]
    y = dataset.labels[plan.member_ids]
    # shards hold base-set ids; run_strategy wants positions into x
    shards = [np.searchsorted(plan.member_ids, shard) for shard in plan.client_shards]
    train_seed = derive_seed(seed, _TRAIN_NS, plan.split_index)
    ensemble = run_strategy(cfg, x, y, arch, train_seed, shards=shards, tau=tau)
    return ModelHandle(plan.split_index, ensemble, train_seed)


@dataclass
class ResultsRow:
    """One (model, attack) measurement; split_index -1 is the mean row."""

    strategy: str
    split_index: int
    attack: str
    auc: float
    tpr_at_fpr: float
    accuracy: float
    comm_bytes: int
    seed: int


@dataclass
class CrossValidationResult:
    rows: list[ResultsRow]
    roc_curves: dict[tuple[str, str], RocCurve]


def _view_scores(tag: str, probs: np.ndarray, y: np.ndarray, lira_ctx) -> np.ndarray:
    if tag == "entropy":
        return entropy_scores(probs)
    if tag == "mentr":
        return mentr_scores(probs, y)
    shadow_phis, in_mask = lira_ctx
    return lira_scores_from_phis(logit_confidences(probs, y), shadow_phis, in_mask)


def cross_validate(
    cfg: RoundConfig,
    dataset: Dataset,
    num_splits: int,
    attacks: tuple[str, ...] = ATTACK_TAGS,
    *,
    arch: Architecture | None = None,
    member_fraction: float = 0.5,
    target_fpr: float = 1e-3,
    seed: int = 0,
    tau: float = DEFAULT_TAU,
    workers: int = 1,
) -> CrossValidationResult:
    """Run the full protocol: S models, every attack, per-model and mean rows.

    Per-model metrics average over client views; weight-sharing strategies
    additionally get rows for their aggregated model under the label
    "<strategy>+agg".  LiRA scores that cannot be calibrated because no
    shadow held the sample out (possible at small S) are dropped from
    that model's score set; at S=32 the case virtually never occurs.
    """
    attacks = tuple(attacks)
    if not attacks:
        raise ValueError("need at least one attack tag")
    for tag in attacks:
        if tag not in ATTACK_TAGS:
            raise ValueError(f"unknown attack {tag!r}, expected one of {ATTACK_TAGS}")
    if "lira" in attacks and num_splits < 3:
        raise ValueError("lira needs at least 3 splits for shadow models")
    if workers < 1:
        raise ValueError("workers must be at least 1")

    x_all = dataset.features
    y_all = np.asarray(dataset.labels, dtype=np.int64)
    if arch is None:
        arch = Architecture(input_dim=x_all.shape[1], num_classes=dataset.num_classes)

    plans = make_splits(len(dataset), num_splits, member_fraction, cfg.num_clients, seed)

    def _train(plan: SplitPlan) -> ModelHandle:
        return train_model(plan, cfg, dataset, arch, seed, tau)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            handles = list(pool.map(_train, plans))
    else:
        handles = [_train(plan) for plan in plans]

    member_mask = np.zeros((num_splits, len(dataset)), dtype=bool)
    for i, plan in enumerate(plans):
        member_mask[i, plan.member_ids] = True

    # shadows always score through the canonical (client-averaged) output
    canon_phi = None
    if "lira" in attacks:
        canon_phi = np.stack(
            [logit_confidences(h.predict_proba(x_all), y_all) for h in handles]
        )

    per_split: dict[tuple[str, str], list[ResultsRow]] = {}
    pooled: dict[tuple[str, str], tuple[list[np.ndarray], list[np.ndarray]]] = {}

    for i, (plan, handle) in enumerate(zip(plans, handles)):
        is_member = member_mask[i]
        holdout = ~is_member
        lira_ctx = None
        if canon_phi is not None:
            others = np.arange(num_splits) != i
            lira_ctx = (canon_phi[others], member_mask[others])

        variants = [(handle.strategy, handle.predict_proba_per_client(x_all))]
        if handle.has_aggregate:
            variants.append(
                (handle.strategy + AGGREGATE_SUFFIX, handle.predict_proba_aggregate(x_all)[None])
            )
        for label, views in variants:
            acc = float(
                np.mean(
                    [accuracy(v[holdout].argmax(axis=1), y_all[holdout]) for v in views]
                )
            )
            for tag in attacks:
                aucs, tprs = [], []
                for view_probs in views:
                    scores = _view_scores(tag, view_probs, y_all, lira_ctx)
                    valid = ~np.isnan(scores)  # uncalibratable lira samples
                    aucs.append(auc(scores[valid], is_member[valid]))
                    tprs.append(tpr_at_fpr(roc_curve(scores[valid], is_member[valid]), target_fpr))
                    bucket = pooled.setdefault((label, tag), ([], []))
                    bucket[0].append(scores[valid])
                    bucket[1].append(is_member[valid])
                row = ResultsRow(
                    strategy=label,
                    split_index=plan.split_index,
                    attack=tag,
                    auc=float(np.mean(aucs)),
                    tpr_at_fpr=float(np.mean(tprs)),
                    accuracy=acc,
                    comm_bytes=handle.comm_bytes,
                    seed=seed,
                )
                per_split.setdefault((label, tag), []).append(row)

    rows: list[ResultsRow] = []
    for (label, tag), split_rows in per_split.items():
        rows.extend(split_rows)
        rows.append(
            ResultsRow(
                strategy=label,
                split_index=MEAN_SPLIT_INDEX,
                attack=tag,
                auc=float(np.mean([r.auc for r in split_rows])),
                tpr_at_fpr=float(np.mean([r.tpr_at_fpr for r in split_rows])),
                accuracy=float(np.mean([r.accuracy for r in split_rows])),
                comm_bytes=int(round(np.mean([r.comm_bytes for r in split_rows]))),
                seed=seed,
            )
        )

    curves = {
        key: roc_curve(np.concatenate(scores), np.concatenate(flags))
        for key, (scores, flags) in pooled.items()
    }
    return CrossValidationResult(rows, curves)
