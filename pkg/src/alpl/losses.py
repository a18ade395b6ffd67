"""Training objectives for the predictor and the WorseNet.

All losses consume softmax probabilities and report exact gradients with
respect to the producing logits, so the finite-difference oracle in the
test suite can check them end to end. Batch reduction is the mean, which
keeps the learning rate meaningful across batch sizes.

``rc_loss`` is the risk-consistent weighted cross entropy over the
candidate set; ``irc_loss`` is the same objective over the inverse set with
the WorseNet's probabilities. The normalization weights are detached by
default: they are recomputed every call but treated as constants in the
gradient. ``kld_term`` penalizes, on the inverse set only, the divergence
of the WorseNet from the frozen predictor; gradients flow only through the
WorseNet side. ``worse_loss`` combines the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, DataError, NumericError
from .nn import PROB_FLOOR


@dataclass
class LossReport:
    """Scalar loss, gradient w.r.t. the trained net's logits, and the
    detached per-class weights the loss actually used."""

    value: float
    grad_wrt_logits: np.ndarray
    weight_snapshot: np.ndarray


class EntropyDecomposition(NamedTuple):
    """Worse-loss value under the complementarity substitution, its
    entropy-style reformulation, and the constant separating them."""

    lhs: float
    rhs: float
    constant: float
    log_weights: np.ndarray


def _check_inputs(probs, masks, what):
    probs = np.asarray(probs, dtype=float)
    masks = np.asarray(masks, dtype=bool)
    if probs.shape != masks.shape or probs.ndim != 2:
        raise DataError(
            f"probabilities {probs.shape} and masks {masks.shape} must both be (batch, k)"
        )
    if not np.all(np.isfinite(probs)):
        raise NumericError("non-finite probabilities")
    empty = ~masks.any(axis=1)
    if empty.any():
        raise DataError(f"empty {what} for sample(s) {np.flatnonzero(empty).tolist()}")
    return probs, masks


def _weighted_ce(probs, masks, detach_weights):
    """Weighted cross entropy over the masked classes.

    Per sample: sum_j w_j * (-log p_j) with w_j = p_j / sum_{z in mask} p_z.
    Returns (value, grad_wrt_logits, weights).
    """
    batch = probs.shape[0]
    clamped = np.maximum(probs, PROB_FLOOR)
    masked = np.where(masks, clamped, 0.0)
    denom = np.maximum(masked.sum(axis=1, keepdims=True), PROB_FLOOR)
    weights = masked / denom
    neg_log = -np.log(clamped)
    per_sample = (weights * np.where(masks, neg_log, 0.0)).sum(axis=1)
    value = float(per_sample.mean())
    weight_sum = weights.sum(axis=1, keepdims=True)
    grad = probs * weight_sum - weights
    if not detach_weights:
        # Flow through the normalization: the weights form a softmax over
        # the masked classes, adding w_c * (-log p_c - per_sample_loss).
        grad = grad + np.where(masks, weights * (neg_log - per_sample[:, None]), 0.0)
    return value, grad / batch, weights


def rc_loss(probs: np.ndarray, sets: np.ndarray, detach_weights: bool = True) -> LossReport:
    """Risk-consistent loss of the predictor over candidate sets."""
    probs, sets = _check_inputs(probs, sets, "candidate set")
    value, grad, weights = _weighted_ce(probs, sets, detach_weights)
    return LossReport(value, grad, weights)


def irc_loss(probs: np.ndarray, inv_sets: np.ndarray, detach_weights: bool = True) -> LossReport:
    """Inverse variant: the same weighted cross entropy over inverse sets,
    driven by the WorseNet's probabilities."""
    probs, inv_sets = _check_inputs(probs, inv_sets, "inverse candidate set")
    value, grad, weights = _weighted_ce(probs, inv_sets, detach_weights)
    return LossReport(value, grad, weights)


def kld_term(p_detached: np.ndarray, q: np.ndarray, inv_sets: np.ndarray) -> LossReport:
    """Divergence of the WorseNet from the frozen predictor on inverse sets.

    Per sample: sum_{j in inverse set} p_j * log(p_j / q_j). The predictor
    probabilities ``p_detached`` are constants; the gradient is w.r.t. the
    logits behind ``q`` only. The restricted sum may be negative.
    """
    q, inv_sets = _check_inputs(q, inv_sets, "inverse candidate set")
    p = np.asarray(p_detached, dtype=float)
    if p.shape != q.shape:
        raise DataError(f"predictor probs {p.shape} do not match {q.shape}")
    if not np.all(np.isfinite(p)):
        raise NumericError("non-finite reference probabilities")
    batch = q.shape[0]
    p_ref = np.where(inv_sets, np.maximum(p, PROB_FLOOR), 0.0)
    q_clamped = np.maximum(q, PROB_FLOOR)
    per_sample = (p_ref * (np.log(np.maximum(p_ref, PROB_FLOOR)) - np.log(q_clamped))
                  * inv_sets).sum(axis=1)
    value = float(per_sample.mean())
    grad = (q * p_ref.sum(axis=1, keepdims=True) - p_ref) / batch
    return LossReport(value, grad, p_ref)


def worse_loss(q: np.ndarray, p_detached: np.ndarray, inv_sets: np.ndarray,
               alpha: float = 1.0, detach_weights: bool = True) -> LossReport:
    """WorseNet objective: inverse weighted cross entropy plus
    ``alpha`` times the restricted divergence term."""
    if alpha < 0:
        raise ConfigurationError(f"alpha must be nonnegative, got {alpha}")
    irc = irc_loss(q, inv_sets, detach_weights=detach_weights)
    kld = kld_term(p_detached, q, inv_sets)
    return LossReport(
        value=irc.value + alpha * kld.value,
        grad_wrt_logits=irc.grad_wrt_logits + alpha * kld.grad_wrt_logits,
        weight_snapshot=irc.weight_snapshot,
    )


def worse_loss_entropy_decomposition(q: np.ndarray, inv_set: np.ndarray) -> EntropyDecomposition:
    """Evaluate both sides of the worse-loss identity for one sample.

    Under the complementarity assumption p_j = 1 - q_j on the inverse set
    (and alpha = 1), the worse loss equals a positively-weighted
    negative-log term plus a constant:

        lhs = irc(q) + kld(1-q, q)
        rhs = sum_j -n_j * log q_j,  n_j = (q_j + (1-q_j) * sigma) / sigma
        constant = sum_j p_j * log p_j

    with sigma the q-mass on the inverse set and all sums over it. The
    contract is lhs == rhs + constant (1e-10 in the interior; 1e-6 when a
    q_j sits exactly on {0, 1} and the probability clamp engages).
    """
    q = np.asarray(q, dtype=float)
    inv_set = np.asarray(inv_set, dtype=bool)
    if q.ndim != 1 or q.shape != inv_set.shape:
        raise DataError("expected one probability row and one inverse mask")
    if not inv_set.any():
        raise DataError("empty inverse candidate set")
    q_in = np.maximum(q[inv_set], PROB_FLOOR)
    p_in = np.maximum(1.0 - q[inv_set], PROB_FLOOR)
    sigma = max(float(q_in.sum()), PROB_FLOOR)
    log_q = np.log(q_in)
    log_p = np.log(p_in)
    irc = float(-(q_in / sigma) @ log_q)
    kld = float(p_in @ (log_p - log_q))
    n_weights = (q_in + (1.0 - q_in) * sigma) / sigma
    rhs = float(-(n_weights @ log_q))
    constant = float(p_in @ log_p)
    return EntropyDecomposition(lhs=irc + kld, rhs=rhs, constant=constant,
                                log_weights=n_weights)
