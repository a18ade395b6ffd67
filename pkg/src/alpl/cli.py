"""Command-line interface.

Subcommands:

* ``run``        execute an experiment from a config file and/or flags
* ``gen-data``   emit a synthetic Gaussian-blobs dataset as CSV
* ``validate``   check a dataset file and report its shape
* ``summarize``  recompute a summary CSV from a records JSONL

Every config key is also a ``run`` flag (underscores become dashes), and
flags override file keys. ``ALPL_OUTPUT_ROOT`` relocates relative output
directories.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import (ExperimentConfig, apply_overrides, coerce_value,
                     load_config, serialize_config)
from .datasets import load_csv, load_idx, make_blobs, write_csv
from .errors import ConfigurationError, DataError, FormatError
from .experiment import (ExperimentError, read_records, run_experiment,
                         summarize_records, write_summary_csv)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for field in dataclasses.fields(ExperimentConfig):
        parser.add_argument(f"--{field.name.replace('_', '-')}",
                            dest=field.name, default=None, metavar="V",
                            help=f"override config key {field.name}")


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for field in dataclasses.fields(ExperimentConfig):
        raw = getattr(args, field.name, None)
        if raw is not None:
            overrides[field.name] = coerce_value(field, raw)
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alpl",
        description="Active learning with partial labels: run the query "
                    "loop with a simulated oracle and summarize the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment")
    run_p.add_argument("--config", default=None, help="config file path")
    run_p.add_argument("--print-config", action="store_true",
                       help="print the resolved config and exit")
    _add_config_flags(run_p)

    gen_p = sub.add_parser("gen-data", help="emit a Gaussian-blobs CSV")
    gen_p.add_argument("--out", required=True)
    gen_p.add_argument("--classes", type=int, default=5)
    gen_p.add_argument("--features", type=int, default=20)
    gen_p.add_argument("--per-class", type=int, default=200)
    gen_p.add_argument("--spread", type=float, default=0.15)
    gen_p.add_argument("--seed", type=int, default=0)

    val_p = sub.add_parser("validate", help="check a dataset file")
    val_p.add_argument("--path", default=None, help="CSV dataset path")
    val_p.add_argument("--images", default=None, help="IDX image file")
    val_p.add_argument("--labels", default=None, help="IDX label file")
    val_p.add_argument("--num-classes", type=int, default=None)

    sum_p = sub.add_parser("summarize", help="recompute a summary CSV")
    sum_p.add_argument("--records", required=True, help="records.jsonl path")
    sum_p.add_argument("--out", required=True, help="summary CSV path")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    config = apply_overrides(config, _collect_overrides(args))
    if args.print_config:
        sys.stdout.write(serialize_config(config))
        return 0
    try:
        result = run_experiment(config)
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"records: {result['records_path']}")
    print(f"summary: {result['summary_path']}")
    for row in result["rows"]:
        print(f"round {row['round_index']:>2}  labeled {row['labeled_size']:>6}  "
              f"plain {row['plain_mean']:.4f} +- {row['plain_std']:.4f}  "
              f"wp {row['wp_mean']:.4f} +- {row['wp_std']:.4f}")
    return 0


def _cmd_gen_data(args) -> int:
    bundle = make_blobs(args.classes, args.features, args.per_class,
                        args.spread, seed=args.seed)
    write_csv(bundle, args.out)
    print(f"wrote {bundle.num_samples} samples "
          f"({bundle.num_classes} classes, {bundle.num_features} features) "
          f"to {args.out}")
    return 0


def _cmd_validate(args) -> int:
    if args.path:
        bundle = load_csv(args.path, args.num_classes)
        source = args.path
    elif args.images and args.labels:
        bundle = load_idx(args.images, args.labels, args.num_classes)
        source = args.images
    else:
        print("error: pass --path for CSV or --images/--labels for IDX",
              file=sys.stderr)
        return 2
    sets = "yes" if bundle.candidate_masks is not None else "no"
    print(f"{source}: {bundle.num_samples} samples, "
          f"{bundle.num_features} features, {bundle.num_classes} classes, "
          f"candidate sets: {sets}, dropped rows: {bundle.dropped_rows}")
    return 0


def _cmd_summarize(args) -> int:
    rows = summarize_records(read_records(args.records))
    write_summary_csv(rows, args.out)
    print(f"wrote {len(rows)} summary rows to {args.out}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "gen-data": _cmd_gen_data,
        "validate": _cmd_validate,
        "summarize": _cmd_summarize,
    }
    try:
        return handlers[args.command](args)
    except (ConfigurationError, DataError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
