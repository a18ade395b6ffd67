"""Seeded repetition management and metrics persistence.

One experiment = one config executed once per repetition seed. Per-round
records land in ``records.jsonl`` (append-safe, one JSON object per line,
no timestamps in the payload) and the cross-seed aggregate in
``summary.csv`` (mean and std per round for both inference rules). Failed
repetitions never discard the completed ones.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .candidate_sets import Oracle
from .config import ExperimentConfig
from .datasets import (DatasetBundle, combine_splits, load_csv, load_idx,
                       make_blobs, split_train_test)
from .loop import AlplRun, TrainSchedule, run_alpl

log = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "ALPL_OUTPUT_ROOT"

RECORD_FIELDS = (
    "seed", "round_index", "labeled_size", "budget_remaining",
    "test_accuracy_plain", "test_accuracy_wp",
    "val_accuracy_predictor", "val_accuracy_wp", "selector_seconds",
)


class ExperimentError(RuntimeError):
    """At least one repetition failed; partial outputs were preserved."""


def build_bundle(config: ExperimentConfig) -> DatasetBundle:
    declared = config.num_classes or None
    if config.dataset == "blobs":
        bundle = make_blobs(config.blobs_classes, config.blobs_features,
                            config.blobs_per_class, config.blobs_spread,
                            seed=config.dataset_seed,
                            test_fraction=config.test_fraction)
    elif config.dataset == "idx":
        bundle = combine_splits(
            load_idx(config.idx_train_images, config.idx_train_labels, declared),
            load_idx(config.idx_test_images, config.idx_test_labels, declared),
        )
    else:
        bundle = load_csv(config.csv_path, declared)
        if config.csv_test_path:
            bundle = combine_splits(bundle, load_csv(config.csv_test_path, declared))
        else:
            bundle = split_train_test(bundle, config.test_fraction,
                                      seed=config.dataset_seed)
    if config.standardize:
        bundle = bundle.standardized()
    return bundle


def build_run(config: ExperimentConfig, bundle: DatasetBundle, seed: int) -> AlplRun:
    train_idx = bundle.train_indices
    test_idx = bundle.test_indices
    oracle = Oracle(
        mode=config.generation,
        num_classes=bundle.num_classes,
        flip_prob=config.flip_prob,
        rng=np.random.default_rng(np.random.SeedSequence([seed, 1])),
    )
    given = None
    if config.generation == "given":
        if bundle.candidate_masks is None:
            raise ExperimentError("given-mode generation needs stored candidate sets")
        given = bundle.candidate_masks[train_idx]
    schedule = TrainSchedule(
        epochs=config.epochs, batch_size=config.batch_size, lr=config.lr,
        alpha=config.alpha, hidden_dims=tuple(config.hidden_dims),
        reinit_per_round=config.reinit_per_round,
        detach_weights=config.detach_weights,
    )
    return AlplRun(
        train_features=bundle.features[train_idx],
        train_labels=bundle.labels[train_idx],
        test_features=bundle.features[test_idx],
        test_labels=bundle.labels[test_idx],
        num_classes=bundle.num_classes,
        oracle=oracle,
        schedule=schedule,
        selector=config.selector,
        initial_size=config.initial_size,
        query_size=config.query_size,
        rounds=config.rounds,
        budget=config.resolved_budget(),
        val_size=config.val_size,
        seed=seed,
        given_masks=given,
        renormalize_ws=config.renormalize_ws,
    )


def run_single(config: ExperimentConfig, seed: int) -> list[dict]:
    """One repetition: build the dataset and run the loop. Process-safe."""
    bundle = build_bundle(config)
    records = run_alpl(build_run(config, bundle, seed))
    return [r.to_dict() for r in records]


def _worker(args):
    config, seed = args
    return seed, run_single(config, seed)


def resolve_output_dir(config: ExperimentConfig) -> str:
    root = os.environ.get(OUTPUT_ROOT_ENV, "")
    if os.path.isabs(config.output_dir) or not root:
        return config.output_dir
    return os.path.join(root, config.output_dir)


def run_experiment(config: ExperimentConfig) -> dict:
    """Run all repetitions, persist records and summary, return the summary.

    Raises ExperimentError if any repetition failed; whatever completed is
    already on disk by then.
    """
    config.validate()
    out_dir = resolve_output_dir(config)
    os.makedirs(out_dir, exist_ok=True)
    seeds = config.resolved_seeds()
    workers = config.workers or os.cpu_count() or 1
    workers = min(workers, len(seeds))

    results: dict[int, list[dict]] = {}
    failures: dict[int, str] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {seed: pool.submit(_worker, (config, seed)) for seed in seeds}
            for seed, future in futures.items():
                try:
                    results[seed] = future.result()[1]
                except Exception as exc:
                    failures[seed] = str(exc)
    else:
        for seed in seeds:
            try:
                results[seed] = run_single(config, seed)
            except Exception as exc:
                failures[seed] = str(exc)

    records_path = os.path.join(out_dir, "records.jsonl")
    with open(records_path, "w") as fh:
        for seed in seeds:
            for record in results.get(seed, []):
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    rows = summarize_records([r for seed in seeds for r in results.get(seed, [])])
    summary_path = os.path.join(out_dir, "summary.csv")
    write_summary_csv(rows, summary_path)
    for seed, message in failures.items():
        log.error("repetition seed=%d failed: %s", seed, message)
    if failures:
        raise ExperimentError(
            f"{len(failures)} of {len(seeds)} repetitions failed: {failures}"
        )
    return {
        "output_dir": out_dir,
        "records_path": records_path,
        "summary_path": summary_path,
        "rows": rows,
        "seeds": seeds,
    }


def summarize_records(records: list[dict]) -> list[dict]:
    """Aggregate per-round means and stds over seeds."""
    by_round: dict[int, list[dict]] = {}
    for record in records:
        by_round.setdefault(int(record["round_index"]), []).append(record)
    rows = []
    for round_index in sorted(by_round):
        group = by_round[round_index]
        plain = np.array([r["test_accuracy_plain"] for r in group], dtype=float)
        wp = np.array([r["test_accuracy_wp"] for r in group], dtype=float)
        rows.append({
            "round_index": round_index,
            "labeled_size": int(group[0]["labeled_size"]),
            "num_seeds": len(group),
            "plain_mean": float(plain.mean()),
            "plain_std": float(plain.std()),
            "wp_mean": float(wp.mean()),
            "wp_std": float(wp.std()),
        })
    return rows


SUMMARY_COLUMNS = ("round_index", "labeled_size", "num_seeds",
                   "plain_mean", "plain_std", "wp_mean", "wp_std")


def write_summary_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def read_records(path: str) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
