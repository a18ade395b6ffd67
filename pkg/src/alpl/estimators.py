"""Scikit-learn style estimators wrapping the dense-net training loops.

``PartialLabelClassifier`` learns from candidate-set supervision with the
risk-consistent loss. ``WorseNetClassifier`` learns the complementary
pattern from inverse candidate sets with the worse loss, guided by the
frozen predictor's probabilities. Both follow the sklearn estimator
contract (``get_params``/``set_params``/``fit`` returning ``self``) so they
compose with pipelines and model-selection tooling.

When a validation split is supplied to ``fit``, the kept model is the
per-epoch snapshot with the best validation metric: plain accuracy for the
predictor, combined-inference accuracy for the WorseNet.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import nn
from .errors import DataError, NumericError
from .losses import rc_loss, worse_loss
from .validation import check_features, check_masks, check_labels


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    return float(np.mean(np.asarray(predicted) == np.asarray(truth)))


class _DenseNetEstimator(BaseEstimator):
    """Shared fit loop; subclasses define the minibatch loss."""

    def __init__(self, hidden_dims=(300, 300, 300), epochs=200, batch_size=256,
                 lr=0.001, seed=0, shuffle=True, warm_start=False):
        self.hidden_dims = hidden_dims
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.shuffle = shuffle
        self.warm_start = warm_start

    def _batch_loss(self, probs, batch_idx):
        raise NotImplementedError

    def _validation_metric(self, val_probs):
        raise NotImplementedError

    def _fit_loop(self, X, has_validation, X_val):
        rng = np.random.default_rng(self.seed)
        if self.warm_start and getattr(self, "final_net_", None) is not None:
            net = self.final_net_.copy()
        else:
            dims = (X.shape[1], *self.hidden_dims, self._num_classes)
            net = nn.init_net(dims, rng)
        state = nn.init_adam(net, lr=self.lr)
        n = X.shape[0]
        self.loss_history_ = []
        self.val_history_ = []
        best_metric, best_net, best_epoch = -np.inf, None, -1
        for epoch in range(self.epochs):
            order = rng.permutation(n) if self.shuffle else np.arange(n)
            epoch_loss = 0.0
            for start in range(0, n, self.batch_size):
                batch_idx = order[start:start + self.batch_size]
                out = nn.forward(net, X[batch_idx])
                value, grad = self._batch_loss(out.probabilities, batch_idx)
                if not np.isfinite(value):
                    raise NumericError(f"non-finite training loss at epoch {epoch}")
                grads = nn.backward(net, out, grad)
                nn.adam_step(net, state, grads)
                epoch_loss += value * batch_idx.shape[0]
            self.loss_history_.append(epoch_loss / n)
            if has_validation:
                metric = self._validation_metric(nn.forward(net, X_val).probabilities)
                self.val_history_.append(metric)
                if metric > best_metric:
                    best_metric, best_net, best_epoch = metric, net.copy(), epoch
        self.final_net_ = net
        if best_net is None:
            best_net, best_metric, best_epoch = net.copy(), np.nan, self.epochs - 1
        self.net_ = best_net
        self.best_val_metric_ = float(best_metric)
        self.best_epoch_ = best_epoch
        return self

    def _check_fitted(self):
        if getattr(self, "net_", None) is None:
            raise DataError("estimator is not fitted")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_features(X, self.net_.input_dim)
        return nn.forward(self.net_, X).probabilities

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def penultimate(self, X) -> np.ndarray:
        """Last hidden activation, the embedding used by the coreset selector."""
        self._check_fitted()
        X = check_features(X, self.net_.input_dim)
        return nn.forward(self.net_, X).penultimate


class PartialLabelClassifier(_DenseNetEstimator):
    """Dense net trained on candidate sets with the risk-consistent loss.

    Parameters mirror the experiment schedule: `hidden_dims` are the ReLU
    hidden widths, `epochs`/`batch_size`/`lr` drive Adam, `seed` fixes
    initialization and shuffling, `detach_weights` controls whether the
    per-class normalization weights receive gradient (off by default, the
    standard risk-consistent treatment).
    """

    def __init__(self, hidden_dims=(300, 300, 300), epochs=200, batch_size=256,
                 lr=0.001, seed=0, shuffle=True, warm_start=False,
                 detach_weights=True):
        super().__init__(hidden_dims=hidden_dims, epochs=epochs,
                         batch_size=batch_size, lr=lr, seed=seed,
                         shuffle=shuffle, warm_start=warm_start)
        self.detach_weights = detach_weights

    def fit(self, X, candidate_masks, X_val=None, y_val=None):
        """Train on (features, candidate masks); track the best validation
        snapshot when (X_val, y_val) ground truth is given."""
        X = check_features(X)
        masks = check_masks(candidate_masks, X.shape[0])
        self._num_classes = masks.shape[1]
        has_val = X_val is not None
        if has_val:
            X_val = check_features(X_val, X.shape[1])
            self._y_val = check_labels(y_val, self._num_classes)
        self._masks = masks
        try:
            return self._fit_loop(X, has_val, X_val)
        finally:
            del self._masks
            if has_val:
                del self._y_val

    def _batch_loss(self, probs, batch_idx):
        report = rc_loss(probs, self._masks[batch_idx],
                         detach_weights=self.detach_weights)
        return report.value, report.grad_wrt_logits

    def _validation_metric(self, val_probs):
        return accuracy(np.argmax(val_probs, axis=1), self._y_val)


class WorseNetClassifier(_DenseNetEstimator):
    """Dense net trained on inverse candidate sets with the worse loss.

    `reference_probs` passed to ``fit`` are the frozen predictor's
    probabilities for the same rows; they feed the divergence regularizer
    as constants. `alpha` scales that regularizer. Validation is scored by
    the combined inference rule (predictor plus one-minus-WorseNet), so the
    kept snapshot is the one most useful at test time.
    """

    def __init__(self, hidden_dims=(300, 300, 300), epochs=200, batch_size=256,
                 lr=0.001, seed=0, shuffle=True, warm_start=False,
                 alpha=1.0, detach_weights=True):
        super().__init__(hidden_dims=hidden_dims, epochs=epochs,
                         batch_size=batch_size, lr=lr, seed=seed,
                         shuffle=shuffle, warm_start=warm_start)
        self.alpha = alpha
        self.detach_weights = detach_weights

    def fit(self, X, inverse_masks, reference_probs, X_val=None, y_val=None,
            reference_val_probs=None):
        X = check_features(X)
        inv = check_masks(inverse_masks, X.shape[0])
        self._num_classes = inv.shape[1]
        ref = np.asarray(reference_probs, dtype=float)
        if ref.shape != inv.shape:
            raise DataError(
                f"reference probs {ref.shape} do not match masks {inv.shape}"
            )
        has_val = X_val is not None
        if has_val:
            X_val = check_features(X_val, X.shape[1])
            self._y_val = check_labels(y_val, self._num_classes)
            if reference_val_probs is None:
                raise DataError("validation needs the predictor's probabilities")
            self._ref_val = np.asarray(reference_val_probs, dtype=float)
        self._inv_masks = inv
        self._ref_probs = ref
        try:
            return self._fit_loop(X, has_val, X_val)
        finally:
            del self._inv_masks, self._ref_probs
            if has_val:
                del self._y_val, self._ref_val

    def _batch_loss(self, probs, batch_idx):
        report = worse_loss(probs, self._ref_probs[batch_idx],
                            self._inv_masks[batch_idx], alpha=self.alpha,
                            detach_weights=self.detach_weights)
        return report.value, report.grad_wrt_logits

    def _validation_metric(self, val_probs):
        combined = self._ref_val + (1.0 - val_probs)
        return accuracy(np.argmax(combined, axis=1), self._y_val)
