"""Pool-based query loop for active learning with partial labels.

One run proceeds as: annotate a random initial pool, train the predictor
on candidate sets and the WorseNet on their complements, then repeat for
``rounds`` rounds (or until the budget runs out): score the unlabeled
pool, query the top batch, have the oracle annotate it, grow the labeled
and counter-example pools in lockstep, and retrain both nets. Every round
is recorded with test accuracy under plain argmax inference and under the
combined predictor-plus-WorseNet rule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import selectors
from .candidate_sets import Oracle, invert_batch
from .errors import ConfigurationError, RequestError
from .estimators import PartialLabelClassifier, WorseNetClassifier, accuracy
from .validation import check_features, check_labels


@dataclass
class TrainSchedule:
    """Per-round training hyperparameters."""

    epochs: int = 200
    batch_size: int = 256
    lr: float = 0.001
    alpha: float = 1.0
    hidden_dims: tuple = (300, 300, 300)
    reinit_per_round: bool = True
    detach_weights: bool = True
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.lr <= 0:
            raise ConfigurationError("epochs, batch size, and lr must be positive")
        if self.alpha < 0:
            raise ConfigurationError("alpha must be nonnegative")


@dataclass
class PoolState:
    """Index bookkeeping for one run.

    The labeled pool and the counter-example pool share the same indices;
    their masks are exact complements row by row. Unlabeled, labeled, and
    validation indices partition the training rows.
    """

    labeled_indices: np.ndarray
    candidate_masks: np.ndarray
    inverse_masks: np.ndarray
    unlabeled_indices: np.ndarray
    validation_indices: np.ndarray
    validation_masks: np.ndarray
    budget_remaining: int
    round_index: int = 0

    @property
    def labeled_size(self) -> int:
        return int(self.labeled_indices.shape[0])

    def check_invariants(self, n_total: int | None = None) -> None:
        labeled = set(self.labeled_indices.tolist())
        unlabeled = set(self.unlabeled_indices.tolist())
        val = set(self.validation_indices.tolist())
        if labeled & unlabeled or labeled & val or unlabeled & val:
            raise ConfigurationError("labeled/unlabeled/validation pools overlap")
        if n_total is not None and len(labeled | unlabeled | val) != n_total:
            raise ConfigurationError("pools do not cover the training set")
        if self.candidate_masks.shape != self.inverse_masks.shape:
            raise ConfigurationError("candidate and inverse masks diverge in shape")
        if not np.array_equal(self.inverse_masks, ~self.candidate_masks):
            raise ConfigurationError("inverse masks are not exact complements")
        if self.budget_remaining < 0:
            raise ConfigurationError("budget went negative")


@dataclass
class RoundRecord:
    """Metrics captured after (re)training in one round."""

    seed: int
    round_index: int
    labeled_size: int
    budget_remaining: int
    test_accuracy_plain: float
    test_accuracy_wp: float
    val_accuracy_predictor: float
    val_accuracy_wp: float
    selector_seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


def predict_plain(probs: np.ndarray) -> np.ndarray:
    """Argmax prediction from predictor probabilities, lowest index on ties."""
    return np.argmax(np.asarray(probs, dtype=float), axis=1)


def predict_wp(predictor_probs: np.ndarray, worse_probs: np.ndarray) -> np.ndarray:
    """Combined inference: argmax of p + (1 - q), lowest index on ties.

    The predictor votes for what the sample is, the WorseNet against what
    it is not; the class with the largest probability gap wins.
    """
    p = np.asarray(predictor_probs, dtype=float)
    q = np.asarray(worse_probs, dtype=float)
    if p.shape != q.shape:
        raise ConfigurationError(f"probability shapes differ: {p.shape} vs {q.shape}")
    return np.argmax(p + (1.0 - q), axis=1)


def init_pools(train_labels, initial_size: int, val_size: int, budget: int,
               oracle: Oracle, rng: np.random.Generator,
               given_masks=None) -> PoolState:
    """Draw the validation split and the initial labeled pool at random.

    The validation samples are annotated too (they are labeled data in the
    protocol) but their ground truth drives the validation metrics.
    """
    n = len(train_labels)
    if initial_size < 1:
        raise ConfigurationError("initial labeled pool must hold at least 1 sample")
    if val_size < 0 or initial_size + val_size > n:
        raise ConfigurationError(
            f"initial size {initial_size} + validation {val_size} exceed {n} samples"
        )
    perm = rng.permutation(n)
    val_idx = np.sort(perm[:val_size])
    labeled_idx = np.sort(perm[val_size:val_size + initial_size])
    unlabeled_idx = np.sort(perm[val_size + initial_size:])
    masks = oracle.annotate(labeled_idx, train_labels, given_masks)
    val_masks = (oracle.annotate(val_idx, train_labels, given_masks)
                 if val_size else np.zeros((0, oracle.num_classes), dtype=bool))
    state = PoolState(
        labeled_indices=labeled_idx,
        candidate_masks=masks,
        inverse_masks=invert_batch(masks),
        unlabeled_indices=unlabeled_idx,
        validation_indices=val_idx,
        validation_masks=val_masks,
        budget_remaining=budget,
    )
    state.check_invariants(n)
    return state


@dataclass
class AlplRun:
    """Everything one repetition needs: data, oracle, schedule, selector."""

    train_features: np.ndarray
    train_labels: np.ndarray
    test_features: np.ndarray
    test_labels: np.ndarray
    num_classes: int
    oracle: Oracle
    schedule: TrainSchedule = field(default_factory=TrainSchedule)
    selector: str = selectors.RANDOM
    initial_size: int = 20
    query_size: int = 100
    rounds: int = 10
    budget: int | None = None
    val_size: int = 100
    seed: int = 0
    given_masks: np.ndarray | None = None
    renormalize_ws: bool = False

    def __post_init__(self):
        self.train_features = check_features(self.train_features)
        self.train_labels = check_labels(self.train_labels, self.num_classes)
        self.test_features = check_features(self.test_features,
                                            self.train_features.shape[1])
        self.test_labels = check_labels(self.test_labels, self.num_classes)
        if self.selector not in selectors.SELECTOR_KINDS:
            raise ConfigurationError(f"unknown selector {self.selector!r}")
        if self.oracle.num_classes != self.num_classes:
            raise ConfigurationError(
                f"oracle is set up for {self.oracle.num_classes} classes, "
                f"dataset has {self.num_classes}"
            )
        if self.budget is None:
            self.budget = self.query_size * self.rounds


def _train_both(run: AlplRun, state: PoolState, rng, predictor, worsenet):
    """Fit the predictor, then the WorseNet against its fresh snapshot."""
    sched = run.schedule
    X = run.train_features[state.labeled_indices]
    X_val = run.train_features[state.validation_indices]
    y_val = run.train_labels[state.validation_indices]
    has_val = X_val.shape[0] > 0
    if predictor is None or sched.reinit_per_round:
        predictor = PartialLabelClassifier(
            hidden_dims=sched.hidden_dims, epochs=sched.epochs,
            batch_size=sched.batch_size, lr=sched.lr,
            seed=int(rng.integers(2 ** 31)), shuffle=sched.shuffle,
            detach_weights=sched.detach_weights)
    else:
        predictor.seed = int(rng.integers(2 ** 31))
        predictor.warm_start = True
    predictor.fit(X, state.candidate_masks,
                  X_val=X_val if has_val else None,
                  y_val=y_val if has_val else None)
    reference = predictor.predict_proba(X)
    reference_val = predictor.predict_proba(X_val) if has_val else None
    if worsenet is None or sched.reinit_per_round:
        worsenet = WorseNetClassifier(
            hidden_dims=sched.hidden_dims, epochs=sched.epochs,
            batch_size=sched.batch_size, lr=sched.lr,
            seed=int(rng.integers(2 ** 31)), shuffle=sched.shuffle,
            alpha=sched.alpha, detach_weights=sched.detach_weights)
    else:
        worsenet.seed = int(rng.integers(2 ** 31))
        worsenet.warm_start = True
    worsenet.fit(X, state.inverse_masks, reference,
                 X_val=X_val if has_val else None,
                 y_val=y_val if has_val else None,
                 reference_val_probs=reference_val)
    return predictor, worsenet


def _select_query(run: AlplRun, state: PoolState, predictor, worsenet, rng):
    """Pick the next query batch; returns (indices, wall seconds)."""
    pool = state.unlabeled_indices
    start = time.perf_counter()
    if run.selector == selectors.RANDOM:
        chosen = rng.choice(pool, size=run.query_size, replace=False)
    elif run.selector == selectors.CORESET:
        pool_emb = predictor.penultimate(run.train_features[pool])
        labeled_emb = predictor.penultimate(run.train_features[state.labeled_indices])
        positions = selectors.coreset_select(pool_emb, labeled_emb, run.query_size)
        chosen = pool[positions]
    else:
        probs = predictor.predict_proba(run.train_features[pool])
        worse_probs = (worsenet.predict_proba(run.train_features[pool])
                       if selectors.needs_worsenet(run.selector) else None)
        scores = selectors.uncertainty_scores(run.selector, probs, worse_probs,
                                              renormalize=run.renormalize_ws)
        chosen = selectors.select_top_b(selectors.ScoredPool(pool, scores),
                                        run.query_size)
    return np.sort(np.asarray(chosen, dtype=int)), time.perf_counter() - start


def _record(run: AlplRun, state: PoolState, predictor, worsenet,
            selector_seconds: float) -> RoundRecord:
    test_p = predictor.predict_proba(run.test_features)
    test_q = worsenet.predict_proba(run.test_features)
    if state.validation_indices.size:
        X_val = run.train_features[state.validation_indices]
        y_val = run.train_labels[state.validation_indices]
        val_p = predictor.predict_proba(X_val)
        val_q = worsenet.predict_proba(X_val)
        val_plain = accuracy(predict_plain(val_p), y_val)
        val_wp = accuracy(predict_wp(val_p, val_q), y_val)
    else:
        val_plain = val_wp = float("nan")
    return RoundRecord(
        seed=run.seed,
        round_index=state.round_index,
        labeled_size=state.labeled_size,
        budget_remaining=state.budget_remaining,
        test_accuracy_plain=accuracy(predict_plain(test_p), run.test_labels),
        test_accuracy_wp=accuracy(predict_wp(test_p, test_q), run.test_labels),
        val_accuracy_predictor=val_plain,
        val_accuracy_wp=val_wp,
        selector_seconds=selector_seconds,
    )


def run_round(run: AlplRun, state: PoolState, predictor, worsenet, rng):
    """One query round: select, annotate, grow pools, retrain, measure."""
    b = run.query_size
    if state.budget_remaining < b:
        raise RequestError("budget exhausted")
    if state.unlabeled_indices.shape[0] < b:
        raise RequestError("unlabeled pool smaller than the query size")
    chosen, seconds = _select_query(run, state, predictor, worsenet, rng)
    new_masks = run.oracle.annotate(chosen, run.train_labels, run.given_masks)
    state.unlabeled_indices = np.setdiff1d(state.unlabeled_indices, chosen,
                                           assume_unique=True)
    state.labeled_indices = np.concatenate([state.labeled_indices, chosen])
    state.candidate_masks = np.concatenate([state.candidate_masks, new_masks])
    state.inverse_masks = np.concatenate([state.inverse_masks,
                                          invert_batch(new_masks)])
    state.budget_remaining -= b
    state.round_index += 1
    predictor, worsenet = _train_both(run, state, rng, predictor, worsenet)
    record = _record(run, state, predictor, worsenet, seconds)
    return record, predictor, worsenet


def run_alpl(run: AlplRun) -> list[RoundRecord]:
    """Execute initialization plus query rounds until T or the budget ends."""
    rng = np.random.default_rng(np.random.SeedSequence([run.seed]))
    state = init_pools(run.train_labels, run.initial_size, run.val_size,
                       run.budget, run.oracle, rng, run.given_masks)
    predictor, worsenet = _train_both(run, state, rng, None, None)
    records = [_record(run, state, predictor, worsenet, 0.0)]
    while (state.round_index < run.rounds
           and state.budget_remaining >= run.query_size
           and state.unlabeled_indices.shape[0] >= run.query_size):
        record, predictor, worsenet = run_round(run, state, predictor,
                                                worsenet, rng)
        state.check_invariants(len(run.train_labels))
        records.append(record)
    return records
