"""Candidate label sets, their generators, and the simulated oracle.

A candidate set is a fixed-width boolean mask over the ``k`` classes. Valid
sets are proper, nonempty subsets of the label space that contain the true
label; the inverse set is the exact complement and therefore never contains
the true label.

Two simulated annotation schemes are provided:

* ``uss`` draws uniformly from the admissible sets that contain the true
  label (there are ``2**(k-1) - 1`` of them, the full label set excluded).
* ``fps`` includes each false label independently with flip probability
  ``q``; draws that cover every class are rejected and redrawn so the
  result stays a proper subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataError

MAX_CLASSES = 1024

USS = "uss"
FPS = "fps"
GIVEN = "given"
GENERATION_MODES = (USS, FPS, GIVEN)


def validate_mask(mask: np.ndarray, true_label: int | None = None) -> np.ndarray:
    """Check one candidate mask: nonempty, proper, optionally contains y."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 1:
        raise DataError(f"candidate mask must be 1-D, got shape {mask.shape}")
    if mask.shape[0] > MAX_CLASSES:
        raise ConfigurationError(f"k={mask.shape[0]} exceeds supported {MAX_CLASSES}")
    count = int(mask.sum())
    if count == 0:
        raise DataError("candidate set is empty")
    if count == mask.shape[0]:
        raise DataError("candidate set equals the whole label space")
    if true_label is not None and not mask[true_label]:
        raise DataError(f"true label {true_label} missing from candidate set")
    return mask


def generate_uss(true_label: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw over the proper subsets that contain ``true_label``.

    Each false label is flipped with a fair coin; the all-inclusive draw is
    rejected, which leaves every one of the ``2**(k-1) - 1`` admissible sets
    equally likely.
    """
    _check_label(true_label, k)
    while True:
        mask = rng.random(k) < 0.5
        mask[true_label] = True
        if not mask.all():
            return mask


def generate_fps(true_label: int, k: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Include each false label with probability ``q``; reject full sets."""
    _check_label(true_label, k)
    if not 0.0 <= q < 1.0:
        raise ConfigurationError(f"flip probability must lie in [0, 1), got {q}")
    while True:
        mask = rng.random(k) < q
        mask[true_label] = True
        if not mask.all():
            return mask


def invert(mask: np.ndarray) -> np.ndarray:
    """Complement of a candidate set: the inverse partial label."""
    return ~validate_mask(mask)


def invert_batch(masks: np.ndarray) -> np.ndarray:
    masks = np.asarray(masks, dtype=bool)
    for row in masks:
        validate_mask(row)
    return ~masks


def _check_label(true_label: int, k: int) -> None:
    if k < 2 or k > MAX_CLASSES:
        raise ConfigurationError(f"class count must be in [2, {MAX_CLASSES}], got {k}")
    if not 0 <= true_label < k:
        raise ConfigurationError(f"true label {true_label} outside [0, {k})")


@dataclass
class Oracle:
    """Simulated annotator returning candidate masks for queried indices.

    ``mode`` is one of ``uss``, ``fps``, ``given``. In ``given`` mode the
    dataset's stored candidate sets are returned verbatim. An index queried
    once always returns the same mask afterwards.
    """

    mode: str
    num_classes: int
    flip_prob: float = 0.5
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.mode not in GENERATION_MODES:
            raise ConfigurationError(
                f"oracle mode must be one of {GENERATION_MODES}, got {self.mode!r}"
            )
        if self.mode == FPS and not 0.0 <= self.flip_prob < 1.0:
            raise ConfigurationError(
                f"flip probability must lie in [0, 1), got {self.flip_prob}"
            )

    def annotate(self, indices, true_labels, given_masks=None) -> np.ndarray:
        """Candidate masks for ``indices``; ``true_labels`` is indexable by them.

        ``given_masks`` (index-aligned, required in ``given`` mode) carries
        the pre-recorded sets of a real-world dataset.
        """
        indices = np.asarray(indices, dtype=int)
        out = np.zeros((indices.shape[0], self.num_classes), dtype=bool)
        for row, idx in enumerate(indices):
            key = int(idx)
            if key not in self._memo:
                self._memo[key] = self._draw(key, true_labels, given_masks)
            out[row] = self._memo[key]
        return out

    def _draw(self, idx, true_labels, given_masks):
        label = int(true_labels[idx])
        if self.mode == USS:
            return generate_uss(label, self.num_classes, self.rng)
        if self.mode == FPS:
            return generate_fps(label, self.num_classes, self.flip_prob, self.rng)
        if given_masks is None:
            raise DataError("given-mode oracle needs stored candidate sets")
        mask = np.asarray(given_masks[idx], dtype=bool)
        if not mask.any():
            raise DataError(f"no stored candidate set for sample {idx}")
        return validate_mask(mask, true_label=label)
