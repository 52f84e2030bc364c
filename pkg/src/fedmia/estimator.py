"""scikit-learn estimator facade over the strategy runner.

FederatedClassifier makes a strategy run look like any other classifier:
fit on (X, y), predict, predict_proba, clone and grid-search friendly.
The fitted ensemble and its communication ledger stay reachable through
the trailing-underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from fedmia.federation import DEFAULT_TAU, RoundConfig, run_strategy
from fedmia.network import Architecture


class FederatedClassifier(ClassifierMixin, BaseEstimator):
    """Classifier trained under one of the eight federation strategies.

    Parameters mirror RoundConfig plus the architecture knobs; labels may
    be arbitrary values and are encoded internally.  After fit:

    classes_        sorted unique labels
    ensemble_       the TrainedEnsemble with every client model
    comm_bytes_     total bytes moved during training
    n_features_in_  input width
    """

    def __init__(
        self,
        strategy: str = "fedavg",
        num_clients: int = 4,
        rounds: int = 5,
        local_epochs: int = 1,
        lr: float = 0.05,
        mu: float = 0.0,
        batch_size: int = 16,
        hidden_dims: tuple[int, ...] = (64,),
        embed_dim: int = 128,
        tau: float = DEFAULT_TAU,
        random_state: int = 0,
    ) -> None:
        self.strategy = strategy
        self.num_clients = num_clients
        self.rounds = rounds
        self.local_epochs = local_epochs
        self.lr = lr
        self.mu = mu
        self.batch_size = batch_size
        self.hidden_dims = hidden_dims
        self.embed_dim = embed_dim
        self.tau = tau
        self.random_state = random_state

    def fit(self, X, y, client_shards: list[np.ndarray] | None = None):
        """Train on (X, y); client_shards optionally pins the data split."""
        X, y = check_X_y(X, y)
        self.classes_, y_encoded = np.unique(y, return_inverse=True)
        if self.classes_.shape[0] < 2:
            raise ValueError("need at least two classes in y")
        arch = Architecture(
            input_dim=X.shape[1],
            num_classes=self.classes_.shape[0],
            hidden_dims=tuple(self.hidden_dims),
            embed_dim=self.embed_dim,
        )
        cfg = RoundConfig(
            num_clients=self.num_clients,
            rounds=self.rounds,
            local_epochs=self.local_epochs,
            lr=self.lr,
            mu=self.mu,
            batch_size=self.batch_size,
            strategy=self.strategy,
        )
        self.ensemble_ = run_strategy(
            cfg, X, y_encoded, arch, seed=self.random_state, shards=client_shards, tau=self.tau
        )
        self.n_features_in_ = X.shape[1]
        self.comm_bytes_ = self.ensemble_.ledger.total_bytes
        return self

    def _validated(self, X) -> np.ndarray:
        check_is_fitted(self, "ensemble_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        """Mean class probabilities over the deployed client models."""
        X = self._validated(X)
        return self.ensemble_.predict_proba(X)

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return self.classes_[np.argmax(probs, axis=1)]
