"""Independent reference implementations used as test oracles.

Everything here is deliberately written the slow, obvious way (scalar
loops, explicit enumeration, finite differences) and never calls into the
code paths it checks.
"""

import itertools
import math

import numpy as np

from alpl import nn

CLAMP = 1e-12


# ---------------------------------------------------------------- losses

def scalar_rc(probs_row, class_indices):
    """Weighted cross entropy over one candidate set, scalar arithmetic."""
    sigma = sum(max(probs_row[j], CLAMP) for j in class_indices)
    sigma = max(sigma, CLAMP)
    total = 0.0
    for j in class_indices:
        pj = max(probs_row[j], CLAMP)
        total += (pj / sigma) * (-math.log(pj))
    return total


def scalar_kld(p_row, q_row, class_indices):
    total = 0.0
    for j in class_indices:
        pj = max(p_row[j], CLAMP)
        qj = max(q_row[j], CLAMP)
        total += pj * math.log(pj / qj)
    return total


def scalar_entropy_identity(q_row, class_indices):
    """(lhs, rhs, constant) of the worse-loss decomposition, recomputed."""
    sigma = max(sum(max(q_row[j], CLAMP) for j in class_indices), CLAMP)
    lhs = rhs = const = 0.0
    for j in class_indices:
        qj = max(q_row[j], CLAMP)
        pj = max(1.0 - q_row[j], CLAMP)
        lhs += -(qj / sigma) * math.log(qj) + pj * math.log(pj / qj)
        rhs += -((qj + (1.0 - qj) * sigma) / sigma) * math.log(qj)
        const += pj * math.log(pj)
    return lhs, rhs, const


def ref_softmax(logits):
    logits = np.asarray(logits, dtype=float)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def frozen_weighted_ce_of_logits(logits, masks, frozen_weights):
    """Mean weighted cross entropy with the normalization weights held
    fixed, as a pure function of the logits (detached-weight semantics)."""
    probs = np.maximum(ref_softmax(logits), CLAMP)
    per = (frozen_weights * np.where(masks, -np.log(probs), 0.0)).sum(axis=1)
    return float(per.mean())


def full_weighted_ce_of_logits(logits, masks):
    """Mean weighted cross entropy with the weights recomputed from the
    same logits (gradient flows through the normalization)."""
    probs = np.maximum(ref_softmax(logits), CLAMP)
    masked = np.where(masks, probs, 0.0)
    weights = masked / np.maximum(masked.sum(axis=1, keepdims=True), CLAMP)
    per = (weights * np.where(masks, -np.log(probs), 0.0)).sum(axis=1)
    return float(per.mean())


def kld_of_logits(logits_q, p_ref, masks):
    """Mean restricted divergence as a function of the WorseNet logits,
    with the predictor reference probabilities fixed."""
    q = np.maximum(ref_softmax(logits_q), CLAMP)
    p = np.where(masks, np.maximum(p_ref, CLAMP), 0.0)
    per = (p * (np.log(np.maximum(p, CLAMP)) - np.log(q)) * masks).sum(axis=1)
    return float(per.mean())


# ---------------------------------------------- finite-difference oracles

def fd_logit_gradient(loss_of_logits, logits, h=1e-4):
    """Central differences of a scalar function of the logit matrix."""
    logits = np.asarray(logits, dtype=float)
    grad = np.zeros_like(logits)
    it = np.nditer(logits, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        plus = logits.copy()
        plus[idx] += h
        minus = logits.copy()
        minus[idx] -= h
        grad[idx] = (loss_of_logits(plus) - loss_of_logits(minus)) / (2 * h)
        it.iternext()
    return grad


def kink_margin(net, batch):
    """Smallest |pre-activation| over all hidden units and samples.

    Central differences are only a valid derivative estimate away from the
    ReLU kinks; callers should resample instances whose margin is below a
    few multiples of the FD step."""
    a = np.asarray(batch, dtype=float)
    margin = np.inf
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = a @ w.T + b
        margin = min(margin, float(np.abs(z).min()))
        a = np.maximum(z, 0.0)
    return margin


def fd_param_gradients(net, batch, loss_of_probs, h=1e-4):
    """Central differences w.r.t. every weight and bias of the net.

    ``loss_of_probs`` maps the forward probabilities to the scalar under
    test; it must hold any detached quantities fixed itself.
    """
    def evaluate():
        return loss_of_probs(nn.forward(net, batch).probabilities)

    grads_w, grads_b = [], []
    for arrays, out in ((net.weights, grads_w), (net.biases, grads_b)):
        for arr in arrays:
            g = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            while not it.finished:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + h
                up = evaluate()
                arr[idx] = orig - h
                down = evaluate()
                arr[idx] = orig
                g[idx] = (up - down) / (2 * h)
                it.iternext()
            out.append(g)
    return grads_w, grads_b


# ------------------------------------------------------------ generators

def enumerate_uss_sets(k, true_label):
    """All admissible candidate sets containing the true label, as
    frozensets (proper, nonempty subsets of range(k))."""
    others = [c for c in range(k) if c != true_label]
    sets = []
    for r in range(len(others) + 1):
        for combo in itertools.combinations(others, r):
            s = frozenset((true_label, *combo))
            if len(s) < k:
                sets.append(s)
    return sets


def uss_size_distribution(k):
    """Exact law of |S| under the uniform generator: choose the extra
    false labels, all proper subsets equally likely."""
    total = 2 ** (k - 1) - 1
    return {s: math.comb(k - 1, s - 1) / total for s in range(1, k)}


# ------------------------------------------------------------- selectors

def brute_force_scores(kind, p_row, q_row=None):
    """Slow scalar re-implementation of every scoring rule, oriented so
    that higher means query first."""
    p = list(map(float, p_row))
    k = len(p)
    if kind == "mcu":
        return 1.0 - max(p)
    if kind == "mmu":
        top = sorted(p, reverse=True)
        return -(top[0] - top[1])
    if kind == "eu":
        return -sum(v * math.log(max(v, CLAMP)) for v in p)
    gap_set = [z for z in range(k) if p[z] - q_row[z] >= 0.0]
    if not gap_set:
        gap_set = [max(range(k), key=lambda z: p[z] - q_row[z])]
    if kind == "ws-mcu":
        return 1.0 - max(p[z] for z in gap_set)
    if kind == "ws-eu":
        return -sum(p[z] * math.log(max(p[z], CLAMP)) for z in gap_set)
    if kind == "ws-mmu":
        inside = sorted((p[z] for z in gap_set), reverse=True)
        if len(inside) >= 2:
            margin = inside[0] - inside[1]
        else:
            top_class = max(gap_set, key=lambda z: p[z])
            runner = max(p[z] for z in range(k) if z != top_class)
            margin = p[top_class] - runner
        return -margin
    raise ValueError(kind)


def brute_force_top_b(indices, scores, b):
    """Best-b by exhaustive sort on (score desc, index asc)."""
    order = sorted(range(len(indices)), key=lambda i: (-scores[i], indices[i]))
    return [indices[i] for i in order[:b]]


def reference_coreset(pool, labeled, b):
    """Greedy k-center recomputed with explicit scalar loops."""
    pool = [list(map(float, row)) for row in pool]
    labeled = [list(map(float, row)) for row in labeled]

    def dist(a, bb):
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, bb)))

    chosen = []
    if not labeled:
        if b == 0:
            return chosen
        chosen.append(0)
    while len(chosen) < b:
        best_i, best_d = None, -1.0
        for i, point in enumerate(pool):
            if i in chosen:
                continue
            centers = labeled + [pool[j] for j in chosen]
            nearest = min(dist(point, c) for c in centers)
            if nearest > best_d:
                best_i, best_d = i, nearest
        chosen.append(best_i)
    return chosen


# ------------------------------------------------------------------ adam

def reference_adam_trace(theta, grads, lr=0.001, beta1=0.9, beta2=0.999,
                         eps=1e-8):
    """Scalar Adam, one parameter, returns the value after each step."""
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1 ** t)
        v_hat = v / (1 - beta2 ** t)
        theta = theta - lr * m_hat / (math.sqrt(v_hat) + eps)
        out.append(theta)
    return out
