"""Input validation helpers shared by estimators and loaders."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DataError


def check_features(X, expected_dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 2-D float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"features must be a nonempty (n, d) array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("features contain non-finite values")
    if expected_dim is not None and X.shape[1] != expected_dim:
        raise ConfigurationError(
            f"feature dim {X.shape[1]} does not match expected {expected_dim}"
        )
    return X


def check_masks(masks, n_samples: int, num_classes: int | None = None) -> np.ndarray:
    """Coerce to an (n, k) boolean mask matrix with nonempty rows."""
    masks = np.asarray(masks)
    if masks.dtype != bool:
        masks = masks.astype(bool)
    if masks.ndim != 2 or masks.shape[0] != n_samples:
        raise DataError(f"masks must be ({n_samples}, k), got shape {masks.shape}")
    if num_classes is not None and masks.shape[1] != num_classes:
        raise ConfigurationError(
            f"mask width {masks.shape[1]} does not match class count {num_classes}"
        )
    if not masks.any(axis=1).all():
        raise DataError("every mask row needs at least one class")
    return masks


def check_labels(y, num_classes: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise DataError(f"labels must be 1-D, got shape {y.shape}")
    y = y.astype(int)
    if y.size and (y.min() < 0 or y.max() >= num_classes):
        raise DataError(f"labels outside [0, {num_classes})")
    return y
