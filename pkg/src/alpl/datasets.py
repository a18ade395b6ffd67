"""Dataset ingestion: IDX image files, candidate-set CSVs, synthetic blobs.

The CSV format is the package's interchange format: feature columns
``f0..f{d-1}``, a ``true_label`` column, and optionally a
``candidate_labels`` column holding pipe-separated class indices
(e.g. ``2|5|7``) for datasets that ship pre-annotated candidate sets.
Rows whose stored set is unusable (missing the true label, empty, or
covering every class) are dropped with a counted warning.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError, FormatError

log = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class DatasetBundle:
    """Features, true labels, optional stored candidate sets, and the
    train/test partition over the rows."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    train_indices: np.ndarray
    test_indices: np.ndarray
    candidate_masks: np.ndarray | None = None
    dropped_rows: int = 0

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"features {self.features.shape} and labels {self.labels.shape} disagree"
            )
        if self.labels.size and self.labels.max() >= self.num_classes:
            raise DataError(
                f"label {self.labels.max()} outside {self.num_classes} classes"
            )

    @property
    def num_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    def standardized(self) -> "DatasetBundle":
        """Features shifted/scaled to zero mean and unit variance on the
        training split (constant columns are left centered only)."""
        train = self.features[self.train_indices]
        mean = train.mean(axis=0)
        std = train.std(axis=0)
        std[std < 1e-12] = 1.0
        return DatasetBundle(
            features=(self.features - mean) / std,
            labels=self.labels,
            num_classes=self.num_classes,
            train_indices=self.train_indices,
            test_indices=self.test_indices,
            candidate_masks=self.candidate_masks,
            dropped_rows=self.dropped_rows,
        )


def _read_be_u32(data: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(data):
        raise FormatError(f"{path}: truncated at offset {offset}, expected 4 bytes")
    return int.from_bytes(data[offset:offset + 4], "big")


def load_idx(path_images: str, path_labels: str,
             num_classes: int | None = None) -> DatasetBundle:
    """Parse one big-endian IDX image/label file pair.

    Pixels are scaled to [0, 1] and images flattened to rows*cols features.
    All rows land in the train split; pair with a second bundle for test.
    """
    with open(path_images, "rb") as fh:
        img_data = fh.read()
    with open(path_labels, "rb") as fh:
        lbl_data = fh.read()

    magic = _read_be_u32(img_data, 0, path_images)
    if magic != IDX_IMAGES_MAGIC:
        raise FormatError(
            f"{path_images}: bad magic 0x{magic:08x} at offset 0, "
            f"expected 0x{IDX_IMAGES_MAGIC:08x}"
        )
    n = _read_be_u32(img_data, 4, path_images)
    rows = _read_be_u32(img_data, 8, path_images)
    cols = _read_be_u32(img_data, 12, path_images)
    expected = 16 + n * rows * cols
    if len(img_data) < expected:
        raise FormatError(
            f"{path_images}: truncated at offset {len(img_data)}, expected {expected} bytes"
        )
    pixels = np.frombuffer(img_data, dtype=np.uint8, count=n * rows * cols, offset=16)
    features = pixels.reshape(n, rows * cols).astype(float) / 255.0

    magic = _read_be_u32(lbl_data, 0, path_labels)
    if magic != IDX_LABELS_MAGIC:
        raise FormatError(
            f"{path_labels}: bad magic 0x{magic:08x} at offset 0, "
            f"expected 0x{IDX_LABELS_MAGIC:08x}"
        )
    n_labels = _read_be_u32(lbl_data, 4, path_labels)
    if len(lbl_data) < 8 + n_labels:
        raise FormatError(
            f"{path_labels}: truncated at offset {len(lbl_data)}, "
            f"expected {8 + n_labels} bytes"
        )
    labels = np.frombuffer(lbl_data, dtype=np.uint8, count=n_labels, offset=8).astype(int)
    if n_labels != n:
        raise FormatError(
            f"image count {n} and label count {n_labels} disagree"
        )
    k = num_classes if num_classes else int(labels.max()) + 1
    if labels.size and labels.max() >= k:
        raise DataError(f"label {labels.max()} outside declared {k} classes")
    return DatasetBundle(
        features=features, labels=labels, num_classes=k,
        train_indices=np.arange(n), test_indices=np.zeros(0, dtype=int),
    )


def combine_splits(train: DatasetBundle, test: DatasetBundle) -> DatasetBundle:
    """Stack two single-split bundles into one with a proper partition."""
    if train.num_features != test.num_features:
        raise DataError("train and test feature widths differ")
    k = max(train.num_classes, test.num_classes)
    n_train = train.num_samples
    masks = None
    if train.candidate_masks is not None or test.candidate_masks is not None:
        if train.candidate_masks is None or test.candidate_masks is None:
            raise DataError("cannot combine stored candidate sets with none")
        masks = np.concatenate([train.candidate_masks, test.candidate_masks])
    return DatasetBundle(
        features=np.concatenate([train.features, test.features]),
        labels=np.concatenate([train.labels, test.labels]),
        num_classes=k,
        train_indices=np.arange(n_train),
        test_indices=np.arange(n_train, n_train + test.num_samples),
        candidate_masks=masks,
        dropped_rows=train.dropped_rows + test.dropped_rows,
    )


_FEATURE_COL = re.compile(r"^f(\d+)$")


def load_csv(path: str, num_classes: int | None = None) -> DatasetBundle:
    """Load the package CSV format; all rows land in the train split.

    Rows whose candidate set violates the setting's assumptions are
    dropped and counted in ``dropped_rows``.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty file, header row required")
        feature_cols = sorted(
            (c for c in reader.fieldnames if _FEATURE_COL.match(c)),
            key=lambda c: int(c[1:]),
        )
        if not feature_cols:
            raise FormatError(f"{path}: no feature columns f0..f{{d-1}} found")
        if "true_label" not in reader.fieldnames:
            raise FormatError(f"{path}: missing required column 'true_label'")
        has_sets = "candidate_labels" in reader.fieldnames
        rows = list(reader)
    if not rows:
        raise FormatError(f"{path}: no data rows")

    features = np.array([[float(r[c]) for c in feature_cols] for r in rows])
    labels = np.array([int(r["true_label"]) for r in rows])
    set_lists = None
    if has_sets:
        set_lists = [
            [int(tok) for tok in r["candidate_labels"].split("|") if tok != ""]
            for r in rows
        ]
    max_seen = int(labels.max())
    if set_lists is not None:
        max_seen = max(max_seen, max((max(s) for s in set_lists if s), default=0))
    k = num_classes if num_classes else max_seen + 1
    if max_seen >= k:
        raise DataError(f"class index {max_seen} outside declared {k} classes")

    dropped = 0
    if set_lists is not None:
        masks = np.zeros((len(rows), k), dtype=bool)
        keep = np.ones(len(rows), dtype=bool)
        for i, classes in enumerate(set_lists):
            masks[i, classes] = True
            count = masks[i].sum()
            if count == 0 or count == k or not masks[i, labels[i]]:
                keep[i] = False
        dropped = int((~keep).sum())
        if dropped:
            log.warning("%s: dropped %d row(s) with unusable candidate sets",
                        path, dropped)
        features, labels, masks = features[keep], labels[keep], masks[keep]
        if features.shape[0] == 0:
            raise DataError(f"{path}: every row had an unusable candidate set")
    else:
        masks = None
    return DatasetBundle(
        features=features, labels=labels, num_classes=k,
        train_indices=np.arange(features.shape[0]),
        test_indices=np.zeros(0, dtype=int),
        candidate_masks=masks, dropped_rows=dropped,
    )


def write_csv(bundle: DatasetBundle, path: str) -> None:
    """Write a bundle in the package CSV format (all rows, no partition)."""
    header = [f"f{i}" for i in range(bundle.num_features)] + ["true_label"]
    if bundle.candidate_masks is not None:
        header.append("candidate_labels")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(bundle.num_samples):
            row = [repr(float(v)) for v in bundle.features[i]] + [int(bundle.labels[i])]
            if bundle.candidate_masks is not None:
                row.append("|".join(str(c) for c in
                                    np.flatnonzero(bundle.candidate_masks[i])))
            writer.writerow(row)


def split_train_test(bundle: DatasetBundle, test_fraction: float,
                     seed: int = 0) -> DatasetBundle:
    """Re-partition a single-split bundle into train/test at random."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigurationError(f"test fraction must be in (0, 1), got {test_fraction}")
    n = bundle.num_samples
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    perm = rng.permutation(n)
    n_test = max(1, int(round(n * test_fraction)))
    return DatasetBundle(
        features=bundle.features, labels=bundle.labels,
        num_classes=bundle.num_classes,
        train_indices=np.sort(perm[n_test:]),
        test_indices=np.sort(perm[:n_test]),
        candidate_masks=bundle.candidate_masks,
        dropped_rows=bundle.dropped_rows,
    )


def make_blobs(num_classes: int, num_features: int, per_class: int,
               spread: float, seed: int = 0,
               test_fraction: float = 0.2) -> DatasetBundle:
    """Isotropic Gaussian clusters with well-separated class means.

    Means are placed at random directions and rescaled so the smallest
    pairwise distance is max(4 * spread, 1), which keeps the classes
    essentially separable; shrinking ``spread`` toward zero makes them
    exactly so.
    """
    if num_classes < 2 or num_features < 1 or per_class < 1 or spread <= 0:
        raise ConfigurationError(
            "need num_classes >= 2, num_features >= 1, per_class >= 1, spread > 0"
        )
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    means = rng.normal(size=(num_classes, num_features))
    diff = means[:, None, :] - means[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    min_dist = dist[~np.eye(num_classes, dtype=bool)].min()
    means *= max(4.0 * spread, 1.0) / min_dist
    features = np.concatenate([
        means[c] + spread * rng.normal(size=(per_class, num_features))
        for c in range(num_classes)
    ])
    labels = np.repeat(np.arange(num_classes), per_class)
    order = rng.permutation(features.shape[0])
    bundle = DatasetBundle(
        features=features[order], labels=labels[order], num_classes=num_classes,
        train_indices=np.arange(features.shape[0]),
        test_indices=np.zeros(0, dtype=int),
    )
    return split_train_test(bundle, test_fraction, seed=seed)
