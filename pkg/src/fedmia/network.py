"""Dense classifier built on plain numpy: forward, analytic gradients, SGD.

The network is input -> hidden ReLU blocks -> linear embedding -> linear
head.  Everything is float64 internally; the 4-byte wire size used for
communication accounting lives in the containers, not the math.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Bytes per scalar on the wire (float32 convention, independent of the
# float64 math done locally).
WIRE_BYTES_PER_SCALAR = 4

# Probability clamp bounds shared with the attack scores.
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class Architecture:
    """Layer plan for the dense classifier."""

    input_dim: int
    num_classes: int
    hidden_dims: tuple[int, ...] = (64,)
    embed_dim: int = 128

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        dims = (self.input_dim, self.embed_dim, *self.hidden_dims)
        if any(int(d) <= 0 for d in dims):
            raise ValueError("all layer widths must be positive")
        if self.num_classes < 2:
            raise ValueError("need at least two classes")

    @property
    def layer_dims(self) -> tuple[int, ...]:
        """Widths from input to logits, embedding second to last."""
        return (self.input_dim, *self.hidden_dims, self.embed_dim, self.num_classes)

    @property
    def param_count(self) -> int:
        dims = self.layer_dims
        return sum(din * dout + dout for din, dout in zip(dims[:-1], dims[1:]))


@dataclass(eq=False)
class ModelParams:
    """Weights and biases for every layer, in forward order."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases):
            raise ValueError("weights and biases must pair up")

    @property
    def num_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    @property
    def serialized_bytes(self) -> int:
        return WIRE_BYTES_PER_SCALAR * self.num_params

    def copy(self) -> "ModelParams":
        return ModelParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def flat(self) -> np.ndarray:
        """All parameters as one vector, layer by layer."""
        pieces = []
        for w, b in zip(self.weights, self.biases):
            pieces.append(w.ravel())
            pieces.append(b.ravel())
        return np.concatenate(pieces)


# Gradients share the container layout of the parameters they refer to.
Gradients = ModelParams


@dataclass
class FeatureTable:
    """Per-class prototype embeddings plus the sample counts behind them.

    Rows with count zero are placeholders for classes a client never saw;
    every other row has unit norm.
    """

    prototypes: np.ndarray
    counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self) -> None:
        self.prototypes = np.asarray(self.prototypes, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.prototypes.ndim != 2:
            raise ValueError("prototypes must be a (classes, embed_dim) matrix")
        if self.counts.shape != (self.prototypes.shape[0],):
            raise ValueError("counts must hold one entry per class")

    @property
    def num_classes(self) -> int:
        return self.prototypes.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.prototypes.shape[1]

    @property
    def serialized_bytes(self) -> int:
        return WIRE_BYTES_PER_SCALAR * self.prototypes.size


def init_network(arch: Architecture, seed: int) -> ModelParams:
    """Fan-in scaled uniform weights, zero biases, reproducible from seed."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    dims = arch.layer_dims
    for din, dout in zip(dims[:-1], dims[1:]):
        limit = 1.0 / np.sqrt(din)
        weights.append(rng.uniform(-limit, limit, size=(din, dout)))
        biases.append(np.zeros(dout))
    return ModelParams(weights, biases)


def _check_batch(params: ModelParams, batch: np.ndarray) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2:
        raise ValueError("batch must be 2-d (samples, features)")
    if batch.shape[1] != params.weights[0].shape[0]:
        raise ValueError(
            f"batch width {batch.shape[1]} does not match input dim {params.weights[0].shape[0]}"
        )
    return batch


def forward(params: ModelParams, batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the network; returns (embeddings, logits).

    Embeddings are the raw pre-head activations, not normalized here.
    """
    h = _check_batch(params, batch)
    n_hidden = len(params.weights) - 2
    for i in range(n_hidden):
        h = np.maximum(h @ params.weights[i] + params.biases[i], 0.0)
    embeddings = h @ params.weights[-2] + params.biases[-2]
    logits = embeddings @ params.weights[-1] + params.biases[-1]
    return embeddings, logits


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax; accepts a single vector or a matrix."""
    logits = np.asarray(logits, dtype=np.float64)
    squeeze = logits.ndim == 1
    z = np.atleast_2d(logits)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=1, keepdims=True)
    return out[0] if squeeze else out


def _check_labels(labels: np.ndarray, num_classes: int, batch_size: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (batch_size,):
        raise ValueError("labels must be 1-d and match the batch")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"labels must lie in [0, {num_classes})")
    return labels.astype(np.int64)


def loss_and_grad(
    params: ModelParams, batch: np.ndarray, labels: np.ndarray
) -> tuple[float, Gradients]:
    """Mean cross-entropy over the batch and its exact gradients.

    Backprop is written out by hand; the loss uses log-sum-exp so
    saturated logits stay finite.
    """
    x = _check_batch(params, batch)
    if x.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    num_classes = params.weights[-1].shape[1]
    y = _check_labels(labels, num_classes, x.shape[0])

    n_hidden = len(params.weights) - 2
    acts = [x]  # post-activation inputs to each layer
    h = x
    for i in range(n_hidden):
        h = np.maximum(h @ params.weights[i] + params.biases[i], 0.0)
        acts.append(h)
    embeddings = h @ params.weights[-2] + params.biases[-2]
    logits = embeddings @ params.weights[-1] + params.biases[-1]

    shifted = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    rows = np.arange(x.shape[0])
    loss = float(np.mean(logsum - logits[rows, y]))

    probs = softmax(logits)
    dlogits = probs
    dlogits[rows, y] -= 1.0
    dlogits /= x.shape[0]

    grad_w = [np.empty(0)] * len(params.weights)
    grad_b = [np.empty(0)] * len(params.biases)

    grad_w[-1] = embeddings.T @ dlogits
    grad_b[-1] = dlogits.sum(axis=0)
    dembed = dlogits @ params.weights[-1].T

    grad_w[-2] = acts[-1].T @ dembed
    grad_b[-2] = dembed.sum(axis=0)
    dh = dembed @ params.weights[-2].T

    for i in range(n_hidden - 1, -1, -1):
        dpre = dh * (acts[i + 1] > 0.0)
        grad_w[i] = acts[i].T @ dpre
        grad_b[i] = dpre.sum(axis=0)
        dh = dpre @ params.weights[i].T

    return loss, Gradients(grad_w, grad_b)


def _check_same_shape(a: ModelParams, b: ModelParams, what: str) -> None:
    if len(a.weights) != len(b.weights):
        raise ValueError(f"{what}: layer counts differ")
    for aw, bw, ab, bb in zip(a.weights, b.weights, a.biases, b.biases):
        if aw.shape != bw.shape or ab.shape != bb.shape:
            raise ValueError(f"{what}: layer shapes differ")


def sgd_step(params: ModelParams, grads: Gradients, lr: float) -> ModelParams:
    """One plain gradient step; returns new parameters, inputs untouched."""
    _check_same_shape(params, grads, "sgd_step")
    return ModelParams(
        [w - lr * g for w, g in zip(params.weights, grads.weights)],
        [b - lr * g for b, g in zip(params.biases, grads.biases)],
    )


def proximal_grad(
    grads: Gradients, params: ModelParams, anchor: ModelParams, mu: float
) -> Gradients:
    """Add the proximal pull mu * (params - anchor) to each gradient.

    mu == 0 returns grads unchanged so the plain path stays bit-identical.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    if mu == 0.0:
        return grads
    _check_same_shape(grads, params, "proximal_grad")
    _check_same_shape(params, anchor, "proximal_grad")
    return Gradients(
        [g + mu * (p - a) for g, p, a in zip(grads.weights, params.weights, anchor.weights)],
        [g + mu * (p - a) for g, p, a in zip(grads.biases, params.biases, anchor.biases)],
    )


def _normalize_rows(rows: np.ndarray, diagnostics: dict | None = None) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    zero = norms[:, 0] == 0.0
    if diagnostics is not None and zero.any():
        diagnostics["zero_norm_embeddings"] = diagnostics.get("zero_norm_embeddings", 0) + int(
            zero.sum()
        )
    safe = np.where(norms == 0.0, 1.0, norms)
    out = rows / safe
    out[zero] = 0.0
    return out


def extract_features(
    params: ModelParams, batch: np.ndarray, diagnostics: dict | None = None
) -> np.ndarray:
    """Unit-normalized embedding rows; all-zero embeddings stay zero.

    Zero rows are counted into diagnostics["zero_norm_embeddings"] when a
    dict is passed, instead of raising.
    """
    embeddings, _ = forward(params, batch)
    return _normalize_rows(embeddings, diagnostics)


def class_prototypes(
    embeddings: np.ndarray, labels: np.ndarray, num_classes: int
) -> FeatureTable:
    """Mean of the normalized embeddings per class, renormalized to unit norm.

    Zero-norm embeddings carry no direction, so they are left out of both
    the mean and the counts; classes with no usable samples keep a zero
    row and count 0.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2:
        raise ValueError("embeddings must be 2-d")
    labels = _check_labels(labels, num_classes, embeddings.shape[0])
    normalized = _normalize_rows(embeddings)
    usable = np.linalg.norm(normalized, axis=1) > 0.0

    prototypes = np.zeros((num_classes, embeddings.shape[1]))
    counts = np.zeros(num_classes, dtype=np.int64)
    for c in range(num_classes):
        sel = usable & (labels == c)
        counts[c] = int(sel.sum())
        if counts[c]:
            prototypes[c] = _normalize_rows(normalized[sel].mean(axis=0, keepdims=True))[0]
    return FeatureTable(prototypes, counts)


def retrieval_predict(
    embeddings: np.ndarray, table: FeatureTable, tau: float = 0.1
) -> np.ndarray:
    """Softmax over cosine similarity to each prototype, temperature tau.

    Expects unit-normalized embedding rows (extract_features output).
    Classes whose prototype count is zero are excluded from the softmax.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2 or embeddings.shape[1] != table.embed_dim:
        raise ValueError("embeddings must be (samples, embed_dim)")
    active = table.counts > 0
    if not active.any():
        raise ValueError("feature table has no populated prototypes")
    sims = embeddings @ table.prototypes.T
    sims[:, ~active] = -np.inf
    return softmax(sims / tau)
