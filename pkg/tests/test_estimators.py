import numpy as np
import pytest
from sklearn.base import clone

from alpl.estimators import PartialLabelClassifier, WorseNetClassifier
from alpl.candidate_sets import invert_batch
from alpl.errors import DataError


def separable_two_class(n_per=40, seed=0):
    rng = np.random.default_rng(seed)
    X0 = rng.normal(loc=(-2.0, 0.0), scale=0.3, size=(n_per, 2))
    X1 = rng.normal(loc=(2.0, 0.0), scale=0.3, size=(n_per, 2))
    X = np.concatenate([X0, X1])
    y = np.concatenate([np.zeros(n_per, dtype=int), np.ones(n_per, dtype=int)])
    order = rng.permutation(2 * n_per)
    return X[order], y[order]


def singleton_masks(y, k):
    masks = np.zeros((y.shape[0], k), dtype=bool)
    masks[np.arange(y.shape[0]), y] = True
    return masks


def small_predictor(**kw):
    defaults = dict(hidden_dims=(16,), epochs=60, batch_size=32, lr=0.01, seed=0)
    defaults.update(kw)
    return PartialLabelClassifier(**defaults)


def small_worsenet(**kw):
    defaults = dict(hidden_dims=(16,), epochs=60, batch_size=32, lr=0.01, seed=0)
    defaults.update(kw)
    return WorseNetClassifier(**defaults)


class TestPartialLabelClassifier:
    def test_separable_reaches_perfect_validation(self):
        X, y = separable_two_class()
        masks = singleton_masks(y, 2)
        clf = small_predictor().fit(X[:60], masks[:60], X_val=X[60:], y_val=y[60:])
        assert clf.best_val_metric_ == 1.0
        assert np.mean(clf.predict(X[60:]) == y[60:]) == 1.0

    def test_loss_trajectory_reproducible(self):
        X, y = separable_two_class(seed=1)
        masks = singleton_masks(y, 2)
        a = small_predictor(seed=5).fit(X, masks)
        b = small_predictor(seed=5).fit(X, masks)
        assert a.loss_history_ == b.loss_history_
        assert all(np.array_equal(wa, wb)
                   for wa, wb in zip(a.net_.weights, b.net_.weights))

    def test_different_seed_changes_trajectory(self):
        X, y = separable_two_class(seed=1)
        masks = singleton_masks(y, 2)
        a = small_predictor(seed=5).fit(X, masks)
        b = small_predictor(seed=6).fit(X, masks)
        assert a.loss_history_ != b.loss_history_

    def test_exceeds_chance_under_maximal_ambiguity(self):
        # every sample carries the full label set minus one random false
        # label, the weakest nonempty supervision; accuracy averaged over
        # 10 seeds must still beat chance
        from alpl.datasets import make_blobs
        k = 4
        accuracies = []
        for seed in range(10):
            bundle = make_blobs(k, 5, 40, 0.15, seed=seed)
            rng = np.random.default_rng(seed)
            train = bundle.train_indices
            X, y = bundle.features[train], bundle.labels[train]
            masks = np.ones((X.shape[0], k), dtype=bool)
            for i in range(X.shape[0]):
                excluded = (y[i] + 1 + int(rng.integers(k - 1))) % k
                masks[i, excluded] = False
            clf = small_predictor(epochs=40, seed=seed).fit(X, masks)
            test = bundle.test_indices
            accuracies.append(np.mean(
                clf.predict(bundle.features[test]) == bundle.labels[test]))
        assert np.mean(accuracies) > 1.0 / k

    def test_predict_proba_rows_normalized(self):
        X, y = separable_two_class()
        clf = small_predictor(epochs=5).fit(X, singleton_masks(y, 2))
        probs = clf.predict_proba(X)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_unfitted_predict_raises(self):
        with pytest.raises(DataError):
            small_predictor().predict(np.zeros((1, 2)))

    def test_sklearn_params_round_trip(self):
        clf = small_predictor(lr=0.42, detach_weights=False)
        params = clf.get_params()
        assert params["lr"] == 0.42
        assert params["detach_weights"] is False
        cloned = clone(clf)
        assert cloned.get_params() == params

    def test_penultimate_shape(self):
        X, y = separable_two_class()
        clf = small_predictor(hidden_dims=(7, 3), epochs=2).fit(
            X, singleton_masks(y, 2))
        assert clf.penultimate(X[:5]).shape == (5, 3)


class TestWorseNetClassifier:
    def fit_pair(self, epochs=60, alpha=1.0, k=4, seed=0):
        rng = np.random.default_rng(seed)
        centers = np.array([[-3, -3], [-3, 3], [3, -3], [3, 3]], dtype=float)
        X = np.concatenate([c + 0.3 * rng.normal(size=(30, 2)) for c in centers])
        y = np.repeat(np.arange(k), 30)
        # candidate pattern consistent per cluster so the complement is learnable
        masks = np.zeros((X.shape[0], k), dtype=bool)
        for i in range(X.shape[0]):
            masks[i, y[i]] = True
            masks[i, (y[i] + 1) % k] = True
        predictor = small_predictor(epochs=epochs, seed=seed).fit(X, masks)
        inverse = invert_batch(masks)
        ref = predictor.predict_proba(X)
        worse = small_worsenet(epochs=epochs, alpha=alpha, seed=seed + 1)
        worse.fit(X, inverse, ref)
        return X, y, masks, predictor, worse

    def test_argmax_lands_outside_candidate_set(self):
        X, y, masks, _, worse = self.fit_pair()
        top = worse.predict(X)
        outside = ~masks[np.arange(X.shape[0]), top]
        assert outside.mean() >= 0.9

    def test_training_does_not_touch_reference_net(self):
        X, y, masks, predictor, _ = self.fit_pair(epochs=5)
        before = [w.copy() for w in predictor.net_.weights]
        inverse = invert_batch(masks)
        ref = predictor.predict_proba(X)
        small_worsenet(epochs=5).fit(X, inverse, ref)
        assert all(np.array_equal(a, b)
                   for a, b in zip(before, predictor.net_.weights))

    def test_alpha_zero_matches_pure_inverse_training(self):
        # with alpha = 0 the reference probabilities must not matter
        rng = np.random.default_rng(7)
        X, y = separable_two_class(seed=7)
        masks = singleton_masks(y, 2)
        inverse = invert_batch(masks)
        ref_a = rng.dirichlet(np.ones(2), size=X.shape[0])
        ref_b = rng.dirichlet(np.ones(2), size=X.shape[0])
        a = small_worsenet(alpha=0.0, epochs=10).fit(X, inverse, ref_a)
        b = small_worsenet(alpha=0.0, epochs=10).fit(X, inverse, ref_b)
        assert a.loss_history_ == b.loss_history_

    def test_deterministic_per_seed(self):
        X, y = separable_two_class(seed=9)
        masks = singleton_masks(y, 2)
        inverse = invert_batch(masks)
        ref = np.full((X.shape[0], 2), 0.5)
        a = small_worsenet(seed=3, epochs=8).fit(X, inverse, ref)
        b = small_worsenet(seed=3, epochs=8).fit(X, inverse, ref)
        assert a.loss_history_ == b.loss_history_

    def test_validation_uses_combined_rule(self):
        X, y = separable_two_class(seed=11)
        masks = singleton_masks(y, 2)
        inverse = invert_batch(masks)
        predictor = small_predictor(epochs=30).fit(X[:60], masks[:60])
        ref = predictor.predict_proba(X[:60])
        worse = small_worsenet(epochs=10)
        with pytest.raises(DataError):
            worse.fit(X[:60], inverse[:60], ref, X_val=X[60:], y_val=y[60:])
        worse.fit(X[:60], inverse[:60], ref, X_val=X[60:], y_val=y[60:],
                  reference_val_probs=predictor.predict_proba(X[60:]))
        assert 0.0 <= worse.best_val_metric_ <= 1.0

    def test_mismatched_reference_shape(self):
        X, y = separable_two_class()
        inverse = invert_batch(singleton_masks(y, 2))
        with pytest.raises(DataError):
            small_worsenet().fit(X, inverse, np.ones((3, 2)) / 2)
