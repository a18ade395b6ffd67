"""Query strategies for the pool loop.

Scalar scoring follows the three classic uncertainty readings of a softmax
row (least confidence, margin, entropy). The ``ws-`` variants first build
the pseudo candidate set, the classes where the predictor's probability is
at least the WorseNet's, and evaluate the same statistic restricted to that
set without renormalizing. Coreset is the k-center greedy baseline on
penultimate-layer embeddings. ``select_top_b`` turns oriented scores into a
query batch; all ties break toward the lowest sample index so runs are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError, RequestError
from .nn import PROB_FLOOR

RANDOM = "random"
MCU = "mcu"
MMU = "mmu"
EU = "eu"
WS_MCU = "ws-mcu"
WS_MMU = "ws-mmu"
WS_EU = "ws-eu"
CORESET = "coreset"

SELECTOR_KINDS = (RANDOM, MCU, MMU, EU, WS_MCU, WS_MMU, WS_EU, CORESET)
WS_KINDS = (WS_MCU, WS_MMU, WS_EU)


def needs_worsenet(kind: str) -> bool:
    return kind in WS_KINDS


@dataclass
class ScoredPool:
    """Unlabeled sample ids with oriented scores (higher = query first)."""

    indices: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        self.scores = np.asarray(self.scores, dtype=float)
        if self.indices.shape != self.scores.shape or self.indices.ndim != 1:
            raise ConfigurationError("indices and scores must be parallel 1-D arrays")
        if not np.all(np.isfinite(self.scores)):
            raise NumericError("non-finite selector scores")


def mcu_score(p: np.ndarray) -> float:
    """Least-confidence uncertainty: 1 minus the top probability."""
    return float(1.0 - np.max(p))


def mmu_score(p: np.ndarray) -> float:
    """Margin between the top two probabilities (small = uncertain)."""
    p = np.asarray(p, dtype=float)
    if p.shape[-1] < 2:
        raise ConfigurationError("margin needs at least two classes")
    top2 = np.partition(p, -2)[-2:]
    return float(top2[1] - top2[0])


def eu_score(p: np.ndarray) -> float:
    """Shannon entropy of the row (large = uncertain)."""
    p = np.asarray(p, dtype=float)
    return float(-(p * np.log(np.maximum(p, PROB_FLOOR))).sum())


def pseudo_candidate_set(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Classes where the predictor dominates the WorseNet: p - q >= 0.

    Never empty: the differences sum to zero, so the largest one is
    nonnegative (enforced against float rounding by always admitting the
    argmax of the gap).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    gap = p - q
    mask = gap >= 0.0
    rows_empty = ~mask.any(axis=-1)
    if mask.ndim == 1:
        if rows_empty:
            mask[np.argmax(gap)] = True
    elif rows_empty.any():
        mask[rows_empty, np.argmax(gap[rows_empty], axis=1)] = True
    return mask


def ws_score(kind: str, p: np.ndarray, q: np.ndarray, renormalize: bool = False) -> float:
    """Uncertainty of one sample restricted to its pseudo candidate set."""
    if kind not in WS_KINDS:
        raise ConfigurationError(f"not a WorseNet-selector kind: {kind!r}")
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    raw = _ws_raw(kind, p, q, renormalize)
    return float(raw[0])


def _ws_raw(kind, p, q, renormalize):
    """Batched restricted statistics in the base orientation
    (mcu: uncertainty, mmu: margin, eu: entropy)."""
    mask = pseudo_candidate_set(p, q)
    if renormalize:
        # Ablation switch: scale each row by its mass on the pseudo set.
        p = p / np.maximum((p * mask).sum(axis=1, keepdims=True), PROB_FLOOR)
    restricted = np.where(mask, p, -np.inf)
    if kind == WS_MCU:
        return 1.0 - restricted.max(axis=1)
    if kind == WS_EU:
        ent = -p * np.log(np.maximum(p, PROB_FLOOR))
        return np.where(mask, ent, 0.0).sum(axis=1)
    rows = np.arange(p.shape[0])
    top_idx = restricted.argmax(axis=1)
    top = restricted[rows, top_idx]
    inside = restricted.copy()
    inside[rows, top_idx] = -np.inf
    second_inside = inside.max(axis=1)
    # Singleton pseudo set: fall back to the runner-up over all classes.
    full = p.astype(float).copy()
    full[rows, top_idx] = -np.inf
    second_full = full.max(axis=1)
    second = np.where(mask.sum(axis=1) >= 2, second_inside, second_full)
    return top - second


def uncertainty_scores(kind: str, probs: np.ndarray, worse_probs: np.ndarray | None = None,
                       renormalize: bool = False) -> np.ndarray:
    """Oriented scores for a whole pool (higher = query first).

    Margins are negated so that every kind ranks the most uncertain
    samples first and ``select_top_b`` stays strategy-agnostic.
    """
    probs = np.asarray(probs, dtype=float)
    if kind == MCU:
        return 1.0 - probs.max(axis=1)
    if kind == MMU:
        part = np.partition(probs, -2, axis=1)
        return -(part[:, -1] - part[:, -2])
    if kind == EU:
        return -(probs * np.log(np.maximum(probs, PROB_FLOOR))).sum(axis=1)
    if kind in WS_KINDS:
        if worse_probs is None:
            raise ConfigurationError(f"{kind} needs WorseNet probabilities")
        raw = _ws_raw(kind, probs, np.asarray(worse_probs, dtype=float), renormalize)
        return -raw if kind == WS_MMU else raw
    raise ConfigurationError(f"unknown uncertainty kind: {kind!r}")


def select_top_b(scored: ScoredPool, b: int) -> np.ndarray:
    """Sample ids of the ``b`` best scores, ties to the lowest id."""
    if b < 0 or b > scored.indices.shape[0]:
        raise RequestError(f"cannot select {b} of {scored.indices.shape[0]} samples")
    order = np.lexsort((scored.indices, -scored.scores))
    return scored.indices[order[:b]]


def coreset_select(embeddings: np.ndarray, labeled_embeddings: np.ndarray, b: int) -> np.ndarray:
    """k-center greedy: repeatedly take the pool point farthest from the
    covered centers (labeled plus already selected), Euclidean metric.

    Returns positions into ``embeddings``. With no labeled centers the
    first pick seeds at position 0. Ties break toward the lowest position.
    """
    pool = np.asarray(embeddings, dtype=float)
    labeled = np.asarray(labeled_embeddings, dtype=float)
    if pool.ndim != 2 or pool.shape[1] < 1:
        raise ConfigurationError(f"embeddings must be (pool, h), got {pool.shape}")
    n = pool.shape[0]
    if b < 0 or b > n:
        raise RequestError(f"cannot select {b} of {n} samples")
    if b == 0:
        return np.zeros(0, dtype=int)
    selected = []
    if labeled.size == 0:
        selected.append(0)
        min_dist = np.linalg.norm(pool - pool[0], axis=1)
    else:
        sq = (np.square(pool).sum(axis=1)[:, None]
              + np.square(labeled).sum(axis=1)[None, :]
              - 2.0 * pool @ labeled.T)
        min_dist = np.sqrt(np.maximum(sq, 0.0)).min(axis=1)
    while len(selected) < b:
        dist = min_dist.copy()
        dist[selected] = -np.inf
        pick = int(np.argmax(dist))
        selected.append(pick)
        min_dist = np.minimum(min_dist, np.linalg.norm(pool - pool[pick], axis=1))
    return np.asarray(selected, dtype=int)
