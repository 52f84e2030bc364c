"""Synthetic Gaussian class clusters.

Class centers sit on the unit sphere; cluster_spread is the per-axis
noise scale, so small values give well-separated easy problems and
values near 1 overlap heavily.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CENTER_RADIUS = 1.0


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def num_classes(self) -> int:
        return int(self.metadata.get("num_classes", len(np.unique(self.labels))))


def make_clusters(
    num_classes: int,
    input_dim: int,
    samples_per_class: int,
    cluster_spread: float,
    seed: int,
) -> Dataset:
    """Balanced isotropic Gaussian blobs, reproducible from seed."""
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if input_dim < 1 or samples_per_class < 1:
        raise ValueError("input_dim and samples_per_class must be positive")
    if cluster_spread <= 0:
        raise ValueError("cluster_spread must be positive")

    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(num_classes, input_dim))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    if (norms == 0).any():  # measure-zero draw, but keep the math honest
        raise RuntimeError("degenerate center draw")
    centers = raw / norms * CENTER_RADIUS

    features = np.vstack(
        [
            centers[c] + rng.normal(scale=cluster_spread, size=(samples_per_class, input_dim))
            for c in range(num_classes)
        ]
    )
    labels = np.repeat(np.arange(num_classes), samples_per_class)
    return Dataset(
        features,
        labels,
        metadata={
            "num_classes": num_classes,
            "input_dim": input_dim,
            "samples_per_class": samples_per_class,
            "cluster_spread": cluster_spread,
            "center_radius": CENTER_RADIUS,
            "seed": seed,
        },
    )
