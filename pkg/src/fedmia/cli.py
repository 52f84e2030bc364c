"""Command-line entry point: one strategy run, attacks, file output."""

from __future__ import annotations

import argparse
import sys

from fedmia.config import OUTPUT_FORMATS, _parse_attacks, parse_config
from fedmia.federation import STRATEGIES
from fedmia.harness import MEAN_SPLIT_INDEX, cross_validate
from fedmia.results import emit_results, roc_sibling_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedmia",
        description=(
            "Train one federation strategy over repeated member/non-member "
            "splits, run membership-inference attacks, and write results."
        ),
    )
    parser.add_argument("--config", help="key = value file; explicit flags override it")
    parser.add_argument("--strategy", choices=STRATEGIES)
    parser.add_argument("--clients", type=int, help="number of clients N")
    parser.add_argument("--rounds", type=int, help="federation rounds T")
    parser.add_argument("--local-epochs", type=int, dest="local_epochs")
    parser.add_argument("--mu", type=float, help="proximal weight (fedprox/fedproxft)")
    parser.add_argument("--lr", type=float)
    parser.add_argument("--batch-size", type=int, dest="batch_size")
    parser.add_argument("--splits", type=int, help="number of member/non-member splits S")
    parser.add_argument("--member-fraction", type=float, dest="member_fraction")
    parser.add_argument(
        "--attacks", type=_parse_attacks, help="comma list from: entropy,mentr,lira"
    )
    parser.add_argument("--target-fpr", type=float, dest="target_fpr")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--classes", type=int)
    parser.add_argument("--input-dim", type=int, dest="input_dim")
    parser.add_argument("--samples-per-class", type=int, dest="samples_per_class")
    parser.add_argument("--spread", type=float, help="cluster noise scale")
    parser.add_argument("--embed-dim", type=int, dest="embed_dim")
    parser.add_argument("--out", help="results path (default results.csv)")
    parser.add_argument("--format", choices=OUTPUT_FORMATS)
    parser.add_argument("--workers", type=int, help="parallel model trainings")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config")
    try:
        cfg = parse_config(config_path, overrides=args)
        dataset = cfg.make_dataset()
        result = cross_validate(
            cfg.to_round_config(),
            dataset,
            cfg.splits,
            cfg.attacks,
            arch=cfg.to_architecture(),
            member_fraction=cfg.member_fraction,
            target_fpr=cfg.target_fpr,
            seed=cfg.seed,
            workers=cfg.workers,
        )
        emit_results(result.rows, cfg.out, cfg.format, roc_curves=result.roc_curves)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for row in result.rows:
        if row.split_index == MEAN_SPLIT_INDEX:
            print(
                f"{row.strategy:<14} {row.attack:<8} "
                f"auc={row.auc:.4f} tpr@{cfg.target_fpr:g}={row.tpr_at_fpr:.4f} "
                f"acc={row.accuracy:.4f} bytes={row.comm_bytes}"
            )
    print(f"wrote {cfg.out} and {roc_sibling_path(cfg.out)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
