"""Experiment configuration: a flat key = value text format.

Grammar: one ``key = value`` pair per line; ``#`` starts a comment (inline
or whole-line, so values cannot contain ``#``); blank lines are ignored.
Booleans are ``true``/``false``, integer lists are comma-separated. Every
key maps 1:1 to an ``ExperimentConfig`` field and to a ``--key`` CLI flag
(with underscores as dashes). Unknown keys are errors so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .candidate_sets import GENERATION_MODES
from .errors import ConfigurationError
from .selectors import SELECTOR_KINDS

DATASET_KINDS = ("blobs", "idx", "csv")


@dataclass
class ExperimentConfig:
    """All knobs for one experiment (shared across its repetitions)."""

    # dataset
    dataset: str = "blobs"
    blobs_classes: int = 5
    blobs_features: int = 20
    blobs_per_class: int = 200
    blobs_spread: float = 0.15
    idx_train_images: str = ""
    idx_train_labels: str = ""
    idx_test_images: str = ""
    idx_test_labels: str = ""
    csv_path: str = ""
    csv_test_path: str = ""
    num_classes: int = 0          # 0 = infer from the data
    test_fraction: float = 0.2
    standardize: bool = False
    dataset_seed: int = 0
    # candidate-set generation
    generation: str = "fps"
    flip_prob: float = 0.5
    # query strategy
    selector: str = "random"
    renormalize_ws: bool = False
    # pool loop
    initial_size: int = 20
    query_size: int = 100
    rounds: int = 10
    budget: int = 0               # 0 = query_size * rounds
    val_size: int = 100
    # training schedule
    epochs: int = 200
    batch_size: int = 256
    lr: float = 0.001
    alpha: float = 1.0
    hidden_dims: tuple = (300, 300, 300)
    reinit_per_round: bool = True
    detach_weights: bool = True
    # repetitions
    seed: int = 0
    repetitions: int = 5
    seeds: tuple = ()             # explicit per-run seeds override
    workers: int = 0              # 0 = available parallelism
    output_dir: str = "runs"

    def validate(self) -> "ExperimentConfig":
        if self.dataset not in DATASET_KINDS:
            raise ConfigurationError(f"dataset must be one of {DATASET_KINDS}")
        if self.generation not in GENERATION_MODES:
            raise ConfigurationError(f"generation must be one of {GENERATION_MODES}")
        if self.selector not in SELECTOR_KINDS:
            raise ConfigurationError(f"selector must be one of {SELECTOR_KINDS}")
        if not 0.0 <= self.flip_prob < 1.0:
            raise ConfigurationError("flip_prob must lie in [0, 1)")
        if self.initial_size < 1:
            raise ConfigurationError("initial_size must be at least 1")
        if self.query_size < 1 or self.rounds < 0:
            raise ConfigurationError("query_size must be positive, rounds nonnegative")
        if self.epochs < 1 or self.batch_size < 1 or self.lr <= 0:
            raise ConfigurationError("epochs, batch_size, lr must be positive")
        if self.alpha < 0:
            raise ConfigurationError("alpha must be nonnegative")
        if not self.hidden_dims or any(h < 1 for h in self.hidden_dims):
            raise ConfigurationError("hidden_dims must be positive integers")
        if not self.resolved_seeds():
            raise ConfigurationError("need at least one repetition seed")
        if self.dataset == "idx" and not (self.idx_train_images and self.idx_train_labels
                                          and self.idx_test_images and self.idx_test_labels):
            raise ConfigurationError("idx dataset needs all four file paths")
        if self.dataset == "csv" and not self.csv_path:
            raise ConfigurationError("csv dataset needs csv_path")
        if self.generation == "given" and self.dataset != "csv":
            raise ConfigurationError("given-mode candidate sets require a csv dataset")
        return self

    def resolved_budget(self) -> int:
        return self.budget if self.budget else self.query_size * self.rounds

    def resolved_seeds(self) -> list[int]:
        """Per-repetition seeds: the explicit list if given, otherwise the
        base seed hashed with each repetition index (so earlier repetitions
        are stable when more are added)."""
        if self.seeds:
            return [int(s) for s in self.seeds]
        return [
            int(np.random.SeedSequence([self.seed, rep]).generate_state(1)[0])
            for rep in range(self.repetitions)
        ]


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def coerce_value(field: dataclasses.Field, raw: str):
    raw = raw.strip()
    default = field.default
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigurationError(f"{field.name}: expected true/false, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        if raw == "":
            return ()
        return tuple(int(tok.strip()) for tok in raw.split(","))
    return raw


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat key = value grammar into a validated config."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        values[key] = coerce_value(_FIELDS[key], raw)
    return ExperimentConfig(**values).validate()


def serialize_config(config: ExperimentConfig) -> str:
    lines = [f"{f.name} = {_format_value(getattr(config, f.name))}"
             for f in dataclasses.fields(ExperimentConfig)]
    return "\n".join(lines) + "\n"


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def apply_overrides(config: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Return a copy with the given field values replaced (CLI flags win)."""
    unknown = set(overrides) - set(_FIELDS)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    return dataclasses.replace(config, **overrides).validate()
