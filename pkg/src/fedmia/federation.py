"""The eight training strategies and their communication ledgers.

Strategies differ along two axes: what travels over the wire (model
weights, prototype tables, raw per-sample features, or nothing) and what
a deployed client uses to predict (softmax head or prototype retrieval).
Byte accounting uses the 4-byte wire convention from the network module
and is asserted against closed forms in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from fedmia.network import (
    WIRE_BYTES_PER_SCALAR,
    Architecture,
    FeatureTable,
    ModelParams,
    _check_same_shape,
    class_prototypes,
    extract_features,
    forward,
    init_network,
    loss_and_grad,
    proximal_grad,
    retrieval_predict,
    sgd_step,
    softmax,
)
from fedmia.seeding import derive_seed

STRATEGIES = ("global", "local", "fedavg", "fedprox", "fedft", "fedproxft", "fedfft", "fedmft")

# weights travel every round
WEIGHT_SHARING = frozenset({"fedavg", "fedprox", "fedfft", "fedmft"})
# deployed clients predict by prototype retrieval instead of the softmax head
FEATURE_PREDICTING = frozenset({"fedft", "fedproxft", "fedfft", "fedmft"})
PROXIMAL = frozenset({"fedprox", "fedproxft"})

DEFAULT_TAU = 0.1


@dataclass(frozen=True)
class RoundConfig:
    """Knobs shared by every strategy run."""

    num_clients: int
    rounds: int
    local_epochs: int
    lr: float
    mu: float = 0.0
    batch_size: int = 16
    strategy: str = "fedavg"

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}, expected one of {STRATEGIES}")
        for name in ("num_clients", "rounds", "local_epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.mu > 0 and self.strategy not in PROXIMAL:
            raise ValueError(f"mu > 0 only applies to {sorted(PROXIMAL)}, not {self.strategy!r}")


@dataclass
class LedgerEntry:
    round: int
    direction: str  # "up" is client to server
    payload: str
    nbytes: int


@dataclass
class CommLedger:
    """Every transfer of the run, in the order it happened."""

    entries: list[LedgerEntry] = field(default_factory=list)

    def add(self, round: int, direction: str, payload: str, nbytes: int) -> None:
        if direction not in ("up", "down"):
            raise ValueError("direction must be 'up' or 'down'")
        if nbytes < 0:
            raise ValueError("nbytes must be non-negative")
        self.entries.append(LedgerEntry(round, direction, payload, int(nbytes)))

    @property
    def uplink_bytes(self) -> int:
        return sum(e.nbytes for e in self.entries if e.direction == "up")

    @property
    def downlink_bytes(self) -> int:
        return sum(e.nbytes for e in self.entries if e.direction == "down")

    @property
    def total_bytes(self) -> int:
        return self.uplink_bytes + self.downlink_bytes


@dataclass
class ClientState:
    """One client's shard and current model."""

    client_id: int
    shard: np.ndarray
    params: ModelParams


@dataclass
class TrainedEnsemble:
    """Everything a strategy run leaves behind.

    client_params holds each client's final local model (empty for the
    centralized baseline), global_params the last aggregated model where
    weights were shared, feature_table the last global prototype table
    where features were shared.
    """

    strategy: str
    arch: Architecture
    client_params: list[ModelParams]
    global_params: ModelParams | None
    feature_table: FeatureTable | None
    ledger: CommLedger
    tau: float = DEFAULT_TAU

    @property
    def num_views(self) -> int:
        return len(self.client_params) if self.client_params else 1

    def _predict_with(self, params: ModelParams, x: np.ndarray) -> np.ndarray:
        if self.strategy in FEATURE_PREDICTING:
            if self.feature_table is None:
                raise ValueError("feature-predicting strategy without a table")
            return retrieval_predict(extract_features(params, x), self.feature_table, self.tau)
        return softmax(forward(params, x)[1])

    def predict_proba_views(self, x: np.ndarray) -> np.ndarray:
        """Stacked (views, samples, classes) predictions, one per client."""
        models = self.client_params if self.client_params else [self.global_params]
        return np.stack([self._predict_with(m, x) for m in models])

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Mean prediction over client views; the canonical output."""
        return self.predict_proba_views(x).mean(axis=0)

    @property
    def has_aggregate(self) -> bool:
        return self.strategy in WEIGHT_SHARING and self.global_params is not None

    def predict_proba_aggregate(self, x: np.ndarray) -> np.ndarray:
        """Prediction of the server-side aggregated model, where one exists."""
        if not self.has_aggregate:
            raise ValueError(f"strategy {self.strategy!r} keeps no aggregated model")
        return self._predict_with(self.global_params, x)


def aggregate_weights(models: list[ModelParams]) -> ModelParams:
    """Uniform average of the models, layer by layer."""
    if not models:
        raise ValueError("nothing to aggregate")
    for m in models[1:]:
        _check_same_shape(models[0], m, "aggregate_weights")
    return ModelParams(
        [np.mean([m.weights[i] for m in models], axis=0) for i in range(len(models[0].weights))],
        [np.mean([m.biases[i] for m in models], axis=0) for i in range(len(models[0].biases))],
    )


def aggregate_prototypes(tables: list[FeatureTable]) -> FeatureTable:
    """Count-weighted mean of prototype rows, renormalized to unit norm.

    A class nobody saw keeps a zero row and count 0; a class one client
    saw passes through that client's row unchanged.
    """
    if not tables:
        raise ValueError("nothing to aggregate")
    shape = tables[0].prototypes.shape
    if any(t.prototypes.shape != shape for t in tables):
        raise ValueError("tables must agree on classes and embedding width")
    counts = np.sum([t.counts for t in tables], axis=0)
    weighted = np.sum([t.counts[:, None] * t.prototypes for t in tables], axis=0)
    norms = np.linalg.norm(weighted, axis=1, keepdims=True)
    prototypes = np.where(norms > 0, weighted / np.where(norms == 0, 1.0, norms), 0.0)
    return FeatureTable(prototypes, counts)


def local_update(
    x: np.ndarray, y: np.ndarray, anchor: ModelParams, cfg: RoundConfig, seed: int
) -> ModelParams:
    """Epochs of minibatch SGD from the anchor; the anchor is not touched.

    With cfg.mu > 0 every gradient gets the proximal pull toward the
    anchor; mu == 0 runs the identical code path with no pull.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.shape[0] == 0:
        raise ValueError("client shard is empty")
    params = anchor.copy()
    rng = np.random.default_rng(seed)
    for _ in range(cfg.local_epochs):
        order = rng.permutation(x.shape[0])
        for start in range(0, x.shape[0], cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            _, grads = loss_and_grad(params, x[batch], y[batch])
            grads = proximal_grad(grads, params, anchor, cfg.mu)
            params = sgd_step(params, grads, cfg.lr)
    return params


def _default_shards(n: int, num_clients: int) -> list[np.ndarray]:
    return [s for s in np.array_split(np.arange(n), num_clients)]


def _check_shards(shards: list[np.ndarray], n: int, num_clients: int) -> list[np.ndarray]:
    if len(shards) != num_clients:
        raise ValueError(f"expected {num_clients} shards, got {len(shards)}")
    out = []
    for shard in shards:
        shard = np.asarray(shard, dtype=np.int64)
        if shard.size == 0:
            raise ValueError("every client needs at least one sample")
        if shard.min() < 0 or shard.max() >= n:
            raise ValueError("shard indices out of range")
        out.append(shard)
    return out


def run_strategy(
    cfg: RoundConfig,
    x: np.ndarray,
    y: np.ndarray,
    arch: Architecture,
    seed: int,
    shards: list[np.ndarray] | None = None,
    tau: float = DEFAULT_TAU,
) -> TrainedEnsemble:
    """Train one model population under cfg.strategy and account every byte.

    x and y are the member set; shards index into them, one array per
    client.  All randomness descends from seed, so identical calls give
    bit-identical ensembles.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (samples, features) aligned with y")
    shards = _check_shards(
        shards if shards is not None else _default_shards(x.shape[0], cfg.num_clients),
        x.shape[0],
        cfg.num_clients,
    )

    init = init_network(arch, derive_seed(seed, 0))
    ledger = CommLedger()
    model_bytes = init.serialized_bytes
    table_bytes = WIRE_BYTES_PER_SCALAR * arch.num_classes * arch.embed_dim
    strategy = cfg.strategy

    if strategy == "global":
        # the baseline ships every member's raw features to one place, once
        ledger.add(0, "up", "raw_data", WIRE_BYTES_PER_SCALAR * arch.input_dim * x.shape[0])
        solo = replace(cfg, local_epochs=cfg.rounds * cfg.local_epochs)
        params = local_update(x, y, init, solo, derive_seed(seed, 0, 0))
        return TrainedEnsemble(strategy, arch, [], params, None, ledger, tau)

    if strategy == "local":
        solo = replace(cfg, local_epochs=cfg.rounds * cfg.local_epochs)
        client_params = [
            local_update(x[shard], y[shard], init, solo, derive_seed(seed, 0, k))
            for k, shard in enumerate(shards)
        ]
        return TrainedEnsemble(strategy, arch, client_params, None, None, ledger, tau)

    weight_sharing = strategy in WEIGHT_SHARING
    clients = [ClientState(k, shard, init.copy()) for k, shard in enumerate(shards)]
    current = init
    table: FeatureTable | None = None

    for r in range(cfg.rounds):
        round_tables: list[FeatureTable] = []
        feats_pool: list[np.ndarray] = []
        labels_pool: list[np.ndarray] = []
        for client in clients:
            anchor = current if weight_sharing else client.params
            if weight_sharing:
                ledger.add(r, "down", "model", model_bytes)
            client.params = local_update(
                x[client.shard],
                y[client.shard],
                anchor,
                cfg,
                derive_seed(seed, r, client.client_id),
            )
            if weight_sharing:
                ledger.add(r, "up", "model", model_bytes)
            if strategy == "fedfft":
                feats = extract_features(client.params, x[client.shard])
                feats_pool.append(feats)
                labels_pool.append(y[client.shard])
                ledger.add(r, "up", "sample_features", WIRE_BYTES_PER_SCALAR * feats.size)
            elif strategy in FEATURE_PREDICTING:
                feats = extract_features(client.params, x[client.shard])
                round_tables.append(class_prototypes(feats, y[client.shard], arch.num_classes))
                ledger.add(r, "up", "feature_table", table_bytes)

        if weight_sharing:
            current = aggregate_weights([c.params for c in clients])
        if strategy == "fedfft":
            table = class_prototypes(
                np.vstack(feats_pool), np.concatenate(labels_pool), arch.num_classes
            )
        elif strategy in FEATURE_PREDICTING:
            table = aggregate_prototypes(round_tables)
        if strategy in FEATURE_PREDICTING:
            for _ in clients:
                ledger.add(r, "down", "feature_table", table_bytes)

    return TrainedEnsemble(
        strategy,
        arch,
        [c.params for c in clients],
        current if weight_sharing else None,
        table,
        ledger,
        tau,
    )


def ledger_bytes(
    strategy: str,
    cfg: RoundConfig,
    *,
    model_bytes: int,
    num_classes: int,
    embed_dim: int,
    input_dim: int,
    shard_sizes: list[int],
) -> int:
    """Closed-form total bytes for a run; must match the recorded ledger."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    n, t = cfg.num_clients, cfg.rounds
    table_bytes = WIRE_BYTES_PER_SCALAR * num_classes * embed_dim
    total_samples = int(sum(shard_sizes))
    if strategy == "global":
        return WIRE_BYTES_PER_SCALAR * input_dim * total_samples
    if strategy == "local":
        return 0
    if strategy in ("fedavg", "fedprox"):
        return 2 * n * t * model_bytes
    if strategy in ("fedft", "fedproxft"):
        return 2 * n * t * table_bytes
    if strategy == "fedfft":
        return (
            2 * n * t * model_bytes
            + t * WIRE_BYTES_PER_SCALAR * embed_dim * total_samples
            + n * t * table_bytes
        )
    # fedmft: weights both ways plus per-client tables both ways
    return 2 * n * t * model_bytes + 2 * n * t * table_bytes
