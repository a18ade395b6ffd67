"""Dense feed-forward network with analytic backprop and Adam.

The same substrate backs both the predictor and the WorseNet: a stack of
fully-connected layers with ReLU hidden activations and a softmax output.
Everything is plain numpy; gradients are exact vector-Jacobian products so
they can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError

PROB_FLOOR = 1e-12


@dataclass
class DenseNet:
    """Feed-forward network parameters.

    ``layer_dims`` is ``(d, h1, ..., k)``; ``weights[i]`` has shape
    ``(layer_dims[i+1], layer_dims[i])`` and ``biases[i]`` shape
    ``(layer_dims[i+1],)``. Hidden activations are ReLU.
    """

    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]

    def num_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def copy(self) -> "DenseNet":
        return DenseNet(
            layer_dims=self.layer_dims,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            activation=self.activation,
        )


@dataclass
class BatchOutput:
    """Forward-pass result plus the activations backprop needs.

    ``layer_inputs[i]`` is the input to linear layer ``i`` (so
    ``layer_inputs[0]`` is the batch itself and ``layer_inputs[-1]`` is the
    penultimate activation); ``relu_masks[i]`` marks the positive
    pre-activations of hidden layer ``i``.
    """

    logits: np.ndarray
    probabilities: np.ndarray
    layer_inputs: list[np.ndarray] = field(repr=False, default_factory=list)
    relu_masks: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def penultimate(self) -> np.ndarray:
        return self.layer_inputs[-1]


@dataclass
class NetGradients:
    """Parameter gradients, shape-parallel to DenseNet.weights/biases."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class AdamState:
    """Adam optimizer state for one DenseNet."""

    step_count: int
    first_moment: NetGradients
    second_moment: NetGradients
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_net(layer_dims, seed=0) -> DenseNet:
    """Build a DenseNet with He-uniform weights, fully determined by seed.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2:
        raise ConfigurationError(f"need at least input and output dims, got {dims}")
    if any(d <= 0 for d in dims):
        raise ConfigurationError(f"layer dims must be positive, got {dims}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return DenseNet(layer_dims=dims, weights=weights, biases=biases)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax via max subtraction, floored at PROB_FLOOR."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=-1, keepdims=True)
    return np.maximum(probs, PROB_FLOOR)


def forward(net: DenseNet, batch: np.ndarray) -> BatchOutput:
    """Run the batch through the net, caching activations for backward."""
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise ConfigurationError(
            f"batch shape {batch.shape} does not match input dim {net.input_dim}"
        )
    layer_inputs = [batch]
    relu_masks = []
    a = batch
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = a @ w.T + b
        relu_masks.append(z > 0.0)
        a = np.maximum(z, 0.0)
        layer_inputs.append(a)
    logits = a @ net.weights[-1].T + net.biases[-1]
    return BatchOutput(
        logits=logits,
        probabilities=softmax(logits),
        layer_inputs=layer_inputs,
        relu_masks=relu_masks,
    )


def backward(net: DenseNet, cache: BatchOutput, grad_wrt_logits: np.ndarray) -> NetGradients:
    """Exact parameter gradients of the scalar loss whose logit-gradient is given.

    The supplied gradient is propagated unchanged (a vector-Jacobian
    product), so a mean-reduced loss yields batch-averaged parameter
    gradients because its logit-gradient already carries the 1/batch factor.
    """
    grad = np.asarray(grad_wrt_logits, dtype=float)
    if grad.shape != cache.logits.shape:
        raise ConfigurationError(
            f"gradient shape {grad.shape} does not match logits {cache.logits.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericError("non-finite gradient w.r.t. logits")
    d_weights = [None] * len(net.weights)
    d_biases = [None] * len(net.biases)
    for layer in range(len(net.weights) - 1, -1, -1):
        d_weights[layer] = grad.T @ cache.layer_inputs[layer]
        d_biases[layer] = grad.sum(axis=0)
        if layer > 0:
            grad = (grad @ net.weights[layer]) * cache.relu_masks[layer - 1]
    return NetGradients(weights=d_weights, biases=d_biases)


def init_adam(net: DenseNet, lr: float = 0.001, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = lambda arrs: [np.zeros_like(a) for a in arrs]
    return AdamState(
        step_count=0,
        first_moment=NetGradients(zeros(net.weights), zeros(net.biases)),
        second_moment=NetGradients(zeros(net.weights), zeros(net.biases)),
        lr=lr, beta1=beta1, beta2=beta2, eps=eps,
    )


def adam_step(net: DenseNet, state: AdamState, grads: NetGradients):
    """One bias-corrected Adam update, in place. Returns (net, state)."""
    state.step_count += 1
    t = state.step_count
    bias1 = 1.0 - state.beta1 ** t
    bias2 = 1.0 - state.beta2 ** t
    params = net.weights + net.biases
    grad_arrays = grads.weights + grads.biases
    first = state.first_moment.weights + state.first_moment.biases
    second = state.second_moment.weights + state.second_moment.biases
    for p, g, m, v in zip(params, grad_arrays, first, second):
        if g.shape != p.shape:
            raise ConfigurationError(
                f"gradient shape {g.shape} does not match parameter {p.shape}"
            )
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        p -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        if not np.all(np.isfinite(p)):
            raise NumericError(f"non-finite parameters after Adam step {t}")
    return net, state
