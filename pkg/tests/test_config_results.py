"""Unit tests for config parsing and result serialization."""

from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from fedmia.attacks import ATTACK_TAGS
from fedmia.config import ExperimentConfig, parse_config
from fedmia.harness import ResultsRow
from fedmia.metrics import roc_curve
from fedmia.results import (
    CSV_FIELDS,
    emit_results,
    roc_sibling_path,
    rows_to_records,
    write_roc_points,
)

HEADER = "strategy,split_index,attack,auc,tpr_at_fpr,accuracy,comm_bytes,seed"


def make_row(**overrides) -> ResultsRow:
    base = dict(
        strategy="fedavg",
        split_index=0,
        attack="entropy",
        auc=0.625,
        tpr_at_fpr=0.0,
        accuracy=0.9,
        comm_bytes=1680,
        seed=3,
    )
    base.update(overrides)
    return ResultsRow(**base)


def test_defaults_without_file_or_overrides():
    cfg = parse_config()
    assert cfg == ExperimentConfig()
    assert cfg.strategy == "fedavg"
    assert cfg.splits == 32
    assert cfg.member_fraction == 0.5
    assert cfg.attacks == ATTACK_TAGS
    assert cfg.target_fpr == 0.001
    assert cfg.batch_size == 16
    assert cfg.out == "results.csv"


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# nothing but commentary\n\n")
    assert parse_config(str(path)) == ExperimentConfig()


def test_file_values_are_typed(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "strategy = fedft\n"
        "rounds = 4          # trailing comment\n"
        "lr = 0.05\n"
        "attacks = entropy, lira\n"
        "out = table.csv\n"
    )
    cfg = parse_config(str(path))
    assert cfg.strategy == "fedft"
    assert cfg.rounds == 4
    assert cfg.lr == 0.05
    assert cfg.attacks == ("entropy", "lira")
    assert cfg.out == "table.csv"
    # untouched keys stay at their defaults
    assert cfg.clients == 10


def test_overrides_beat_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("rounds = 3\nlr = 0.5\n")
    cfg = parse_config(str(path), {"rounds": 10, "lr": None})
    assert cfg.rounds == 10  # flag wins
    assert cfg.lr == 0.5  # unset flag leaves the file value


def test_file_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("# header\nrounds = 2\nbogus = 1\n")
    with pytest.raises(ValueError, match=r"bad\.cfg:3.*bogus"):
        parse_config(str(path))

    path.write_text("rounds without equals\n")
    with pytest.raises(ValueError, match=r"bad\.cfg:1.*key = value"):
        parse_config(str(path))

    path.write_text("rounds = ten\n")
    with pytest.raises(ValueError, match=r"bad\.cfg:1.*'ten'"):
        parse_config(str(path))


def test_unknown_override_key_rejected():
    with pytest.raises(ValueError, match="bogus"):
        parse_config(None, {"bogus": 1})


def test_strategy_typo_names_the_valid_set():
    with pytest.raises(ValueError) as err:
        parse_config(None, {"strategy": "fedavgg"})
    message = str(err.value)
    assert "fedavgg" in message
    for name in ("global", "local", "fedavg", "fedmft"):
        assert name in message


@pytest.mark.parametrize(
    "override",
    [
        {"member_fraction": 0.0},
        {"member_fraction": 1.0},
        {"workers": 0},
        {"rounds": 0},
        {"format": "xml"},
        {"target_fpr": 2.0},
        {"attacks": ()},
        {"attacks": ("entropy", "sniff")},
        {"seed": -1},
        {"spread": 0.0},
        {"mu": -0.1},
    ],
)
def test_validation_rejects(override):
    with pytest.raises(ValueError):
        parse_config(None, override)


def test_round_config_and_architecture_mapping():
    cfg = parse_config(None, {"strategy": "fedprox", "mu": 0.01, "clients": 4})
    rc = cfg.to_round_config()
    assert rc.strategy == "fedprox"
    assert rc.mu == 0.01
    assert rc.num_clients == 4
    assert rc.rounds == cfg.rounds
    arch = cfg.to_architecture()
    assert arch.input_dim == cfg.input_dim
    assert arch.num_classes == cfg.classes
    assert arch.embed_dim == cfg.embed_dim
    ds = cfg.make_dataset()
    assert len(ds) == cfg.classes * cfg.samples_per_class


def test_csv_header_is_byte_exact(tmp_path):
    out = tmp_path / "empty.csv"
    emit_results([], out, format="csv")
    assert out.read_bytes() == (HEADER + "\n").encode()
    assert ",".join(CSV_FIELDS) == HEADER


def test_reals_use_six_significant_digits(tmp_path):
    out = tmp_path / "rows.csv"
    rows = [
        make_row(auc=0.123456789, tpr_at_fpr=0.0001234567, accuracy=1 / 3),
        make_row(split_index=-1, auc=1.0, tpr_at_fpr=0.0, accuracy=0.5),
    ]
    emit_results(rows, out, format="csv")
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER
    assert lines[1] == "fedavg,0,entropy,0.123457,0.000123457,0.333333,1680,3"
    assert lines[2] == "fedavg,-1,entropy,1,0,0.5,1680,3"


def test_csv_and_json_carry_identical_values(tmp_path):
    rows = [
        make_row(auc=0.7071067811865476, accuracy=0.98765432),
        make_row(strategy="local", comm_bytes=0, auc=0.5),
    ]
    csv_path = tmp_path / "run.csv"
    json_path = tmp_path / "run.json"
    emit_results(rows, csv_path, format="csv")
    emit_results(rows, json_path, format="json")
    with open(json_path) as fh:
        records = json.load(fh)
    with open(csv_path, newline="") as fh:
        parsed = list(csv.DictReader(fh))
    assert len(parsed) == len(records) == 2
    for rec, row in zip(records, parsed):
        assert row["strategy"] == rec["strategy"]
        assert int(row["split_index"]) == rec["split_index"]
        assert row["attack"] == rec["attack"]
        for field in ("auc", "tpr_at_fpr", "accuracy"):
            assert float(row[field]) == rec[field]
        assert int(row["comm_bytes"]) == rec["comm_bytes"]
        assert int(row["seed"]) == rec["seed"]


def test_json_round_trip_matches_records(tmp_path):
    rows = [make_row(), make_row(split_index=-1, attack="lira", auc=0.55)]
    out = tmp_path / "run.json"
    emit_results(rows, out, format="json")
    with open(out) as fh:
        assert json.load(fh) == rows_to_records(rows)


def test_roc_sibling_written_next_to_results(tmp_path):
    assert roc_sibling_path("results.csv").name == "results_roc.json"
    assert roc_sibling_path(tmp_path / "deep" / "t.json").name == "t_roc.json"

    scores = np.array([3.0, 2.0, 1.0, 0.0])
    flags = np.array([True, True, False, False])
    curves = {("fedavg", "entropy"): roc_curve(scores, flags)}
    out = tmp_path / "run.csv"
    emit_results([make_row()], out, format="csv", roc_curves=curves)
    sibling = roc_sibling_path(out)
    with open(sibling) as fh:
        payload = json.load(fh)
    assert len(payload) == 1
    entry = payload[0]
    assert entry["strategy"] == "fedavg"
    assert entry["attack"] == "entropy"
    # the opening threshold is +inf, which JSON cannot carry
    assert entry["thresholds"][0] is None
    assert all(isinstance(v, float) for v in entry["fpr"])
    assert entry["fpr"][0] == 0.0
    assert entry["tpr"][-1] == 1.0
    assert len(entry["fpr"]) == len(entry["tpr"]) == len(entry["thresholds"])


def test_no_sibling_without_curves(tmp_path):
    out = tmp_path / "run.csv"
    emit_results([make_row()], out, format="csv")
    assert not roc_sibling_path(out).exists()


def test_roc_points_sorted_by_key(tmp_path):
    scores = np.array([1.0, 0.0])
    flags = np.array([True, False])
    curve = roc_curve(scores, flags)
    out = tmp_path / "roc.json"
    write_roc_points(
        {("local", "mentr"): curve, ("fedavg", "lira"): curve}, out
    )
    with open(out) as fh:
        payload = json.load(fh)
    assert [(e["strategy"], e["attack"]) for e in payload] == [
        ("fedavg", "lira"),
        ("local", "mentr"),
    ]


def test_emit_rejects_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit_results([], tmp_path / "x.dat", format="tsv")
