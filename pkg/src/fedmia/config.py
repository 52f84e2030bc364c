"""Experiment configuration from defaults, a config file, and flag overrides.

The file format is flat "key = value" lines with # comments.  Every key
has a CLI flag of the same name (underscores become dashes) and flags
win over file values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from fedmia.attacks import ATTACK_TAGS
from fedmia.datasets import Dataset, make_clusters
from fedmia.federation import STRATEGIES, RoundConfig
from fedmia.network import Architecture

OUTPUT_FORMATS = ("csv", "json")


def _parse_attacks(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; defaults give a small but real experiment."""

    strategy: str = "fedavg"
    clients: int = 10
    rounds: int = 10
    local_epochs: int = 2
    mu: float = 0.0
    lr: float = 0.1
    batch_size: int = 16
    splits: int = 32
    member_fraction: float = 0.5
    attacks: tuple[str, ...] = ATTACK_TAGS
    target_fpr: float = 0.001
    seed: int = 0
    classes: int = 8
    input_dim: int = 16
    samples_per_class: int = 30
    spread: float = 0.5
    embed_dim: int = 128
    out: str = "results.csv"
    format: str = "csv"
    workers: int = 1

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}, expected one of {STRATEGIES}"
            )
        for tag in self.attacks:
            if tag not in ATTACK_TAGS:
                raise ValueError(f"unknown attack {tag!r}, expected one of {ATTACK_TAGS}")
        if not self.attacks:
            raise ValueError("need at least one attack")
        if self.format not in OUTPUT_FORMATS:
            raise ValueError(f"format must be one of {OUTPUT_FORMATS}")
        if not 0.0 <= self.target_fpr <= 1.0:
            raise ValueError("target_fpr must lie in [0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        for name in (
            "clients",
            "rounds",
            "local_epochs",
            "batch_size",
            "splits",
            "classes",
            "input_dim",
            "samples_per_class",
            "workers",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.lr < 0 or self.mu < 0 or self.spread <= 0:
            raise ValueError("lr and mu must be non-negative, spread positive")
        if not 0.0 < self.member_fraction < 1.0:
            raise ValueError("member_fraction must lie strictly between 0 and 1")

    def to_round_config(self) -> RoundConfig:
        return RoundConfig(
            num_clients=self.clients,
            rounds=self.rounds,
            local_epochs=self.local_epochs,
            lr=self.lr,
            mu=self.mu,
            batch_size=self.batch_size,
            strategy=self.strategy,
        )

    def to_architecture(self) -> Architecture:
        return Architecture(
            input_dim=self.input_dim, num_classes=self.classes, embed_dim=self.embed_dim
        )

    def make_dataset(self) -> Dataset:
        return make_clusters(
            self.classes, self.input_dim, self.samples_per_class, self.spread, self.seed
        )


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}

_COERCERS = {
    "str": str,
    "int": int,
    "float": float,
    "tuple[str, ...]": _parse_attacks,
}


def _coerce(key: str, text: str, where: str):
    try:
        return _COERCERS[_FIELD_TYPES[key]](text)
    except (ValueError, TypeError):
        raise ValueError(f"{where}: invalid value {text!r} for key {key!r}") from None


def parse_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge defaults, an optional config file, and already-typed overrides."""
    values: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                where = f"{path}:{lineno}"
                if "=" not in line:
                    raise ValueError(f"{where}: expected 'key = value'")
                key, _, text = line.partition("=")
                key, text = key.strip(), text.strip()
                if key not in _FIELD_TYPES:
                    raise ValueError(f"{where}: unknown key {key!r}")
                values[key] = _coerce(key, text, where)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = value
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg
