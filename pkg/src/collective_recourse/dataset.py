"""Loading, validation, and synthesis of labeled feature batches.

A batch is an immutable (features, labels) pair: N rows of d features plus
one class index per row. Two CSV layouts are supported: a generic labeled
CSV with a named label column (string labels mapped to class indices in
first-appearance order) and the canonical embedding layout ``e0..e{d-1},label``
whose label column already holds integer class indices.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed input files or invalid batch contents."""


def _format_real(value: float) -> str:
    # 17 significant digits round-trips any float64 exactly.
    return format(float(value), ".17g")


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LabeledBatch:
    """Feature matrix (N x d), integer labels (N,), and class count k.

    Invariants enforced at construction: finite features, labels in
    [0, k-1] with every class occupied, N >= k >= 2. Arrays are stored
    read-only, so instances are safely shareable.
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if feats.ndim != 2:
            raise DatasetError(f"features must be 2-D, got shape {feats.shape}")
        if labels.ndim != 1:
            raise DatasetError(f"labels must be 1-D, got shape {labels.shape}")
        if labels.shape[0] != feats.shape[0]:
            raise DatasetError(
                f"label count {labels.shape[0]} does not match row count {feats.shape[0]}"
            )
        k = int(self.num_classes)
        if k < 2:
            raise DatasetError(f"need at least 2 classes, got {k}")
        if feats.shape[0] < k:
            raise DatasetError(f"need at least {k} rows for {k} classes, got {feats.shape[0]}")
        if not np.all(np.isfinite(feats)):
            row, col = np.argwhere(~np.isfinite(feats))[0]
            raise DatasetError(f"non-finite feature value at row {row}, column {col}")
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            bad = int(np.argmax((labels < 0) | (labels >= k)))
            raise DatasetError(f"label {labels[bad]} at row {bad} outside [0, {k - 1}]")
        counts = np.bincount(labels, minlength=k)
        if np.any(counts == 0):
            raise DatasetError(f"empty class: no rows with label {int(np.argmin(counts))}")
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "num_classes", k)

    @property
    def num_rows(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SyntheticSpec:
    """Blob-sampling recipe: k centers, points per class, noise std, seed."""

    centers: np.ndarray
    points_per_class: int
    noise_scale: float
    seed: int

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim != 2:
            raise DatasetError(f"centers must be a k x d matrix, got shape {centers.shape}")
        if not np.all(np.isfinite(centers)):
            raise DatasetError("centers contain non-finite values")
        if self.points_per_class < 1:
            raise DatasetError(f"points_per_class must be >= 1, got {self.points_per_class}")
        if self.noise_scale < 0:
            raise DatasetError(f"noise_scale must be >= 0, got {self.noise_scale}")
        object.__setattr__(self, "centers", _frozen(centers))


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    """Read a comma-separated file with a mandatory header row."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"missing file: {path}")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DatasetError(f"{path}: no rows")
    return rows[0], rows[1:]


def _parse_cell(text: str, line: int, column: str, path) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(
            f"{path}: unparsable value {text!r} at line {line}, column {column!r}"
        ) from None
    if not math.isfinite(value):
        raise DatasetError(f"{path}: non-finite value at line {line}, column {column!r}")
    return value


def load_csv(path, label_column: str, feature_columns=None) -> LabeledBatch:
    """Load a labeled CSV into a batch.

    The file must have a header row; cells use ``.`` decimals and comma
    separators. Distinct label strings are mapped to class indices in order
    of first appearance (for the canonical Iris file this yields setosa=0,
    versicolor=1, virginica=2). ``feature_columns`` restricts and orders the
    feature set; by default every non-label column is used in file order.
    No standardization is applied.
    """
    header, data_rows = _read_rows(path)
    if label_column not in header:
        raise DatasetError(f"{path}: missing column {label_column!r} (header: {header})")
    if feature_columns is None:
        feature_columns = [name for name in header if name != label_column]
    missing = [name for name in feature_columns if name not in header]
    if missing:
        raise DatasetError(f"{path}: missing feature column(s) {missing}")
    if not feature_columns:
        raise DatasetError(f"{path}: no feature columns selected")
    if not data_rows:
        raise DatasetError(f"{path}: no data rows")

    label_idx = header.index(label_column)
    feature_idx = [header.index(name) for name in feature_columns]
    label_to_class: dict[str, int] = {}
    features = []
    labels = []
    for offset, row in enumerate(data_rows):
        line = offset + 2  # header is line 1
        if len(row) != len(header):
            raise DatasetError(
                f"{path}: line {line} has {len(row)} cells, expected {len(header)}"
            )
        features.append(
            [_parse_cell(row[j], line, header[j], path) for j in feature_idx]
        )
        label = row[label_idx].strip()
        if label not in label_to_class:
            label_to_class[label] = len(label_to_class)
        labels.append(label_to_class[label])
    if len(label_to_class) < 2:
        raise DatasetError(f"{path}: found only {len(label_to_class)} distinct label(s)")
    return LabeledBatch(np.asarray(features), np.asarray(labels), len(label_to_class))


def load_embeddings(path) -> LabeledBatch:
    """Load the canonical embedding CSV: columns ``e0..e{d-1}`` then ``label``.

    The label column holds literal class indices; every index 0..max must be
    occupied (a skipped index means an empty class and is rejected).
    """
    header, data_rows = _read_rows(path)
    if len(header) < 2:
        raise DatasetError(f"{path}: need at least one embedding column plus a label column")
    if not data_rows:
        raise DatasetError(f"{path}: no rows")
    label_col = header[-1]
    features = []
    labels = []
    for offset, row in enumerate(data_rows):
        line = offset + 2
        if len(row) != len(header):
            raise DatasetError(
                f"{path}: line {line} has {len(row)} cells, expected {len(header)}"
            )
        features.append(
            [_parse_cell(row[j], line, header[j], path) for j in range(len(header) - 1)]
        )
        raw = _parse_cell(row[-1], line, label_col, path)
        label = int(raw)
        if label != raw or label < 0:
            raise DatasetError(
                f"{path}: label must be a nonnegative integer at line {line}, got {row[-1]!r}"
            )
        labels.append(label)
    labels = np.asarray(labels)
    k = int(labels.max()) + 1
    present = np.bincount(labels, minlength=k)
    if np.any(present == 0):
        raise DatasetError(f"{path}: empty class: no rows with label {int(np.argmin(present))}")
    return LabeledBatch(np.asarray(features), labels, k)


def save_csv(batch: LabeledBatch, path) -> None:
    """Write a batch in the canonical embedding layout (``e0..e{d-1},label``).

    Reals are printed with 17 significant digits, so a save/load round trip
    through :func:`load_embeddings` reproduces the batch bit for bit.
    """
    with open(path, "w", newline="") as handle:
        handle.write(",".join([f"e{j}" for j in range(batch.dim)] + ["label"]) + "\n")
        for row, label in zip(batch.features, batch.labels):
            handle.write(",".join(_format_real(v) for v in row) + f",{int(label)}\n")


def synth_blobs(spec: SyntheticSpec) -> LabeledBatch:
    """Sample isotropic Gaussian blobs, one per center, deterministically.

    Uses numpy's PCG64 generator seeded with ``spec.seed``; class y rows are
    ``centers[y] + noise_scale * standard_normal`` drawn in class order, so a
    fixed spec reproduces the same batch on every run.
    """
    centers = spec.centers
    k, d = centers.shape
    rng = np.random.default_rng(spec.seed)
    per = spec.points_per_class
    features = np.empty((k * per, d))
    for y in range(k):
        noise = spec.noise_scale * rng.standard_normal((per, d))
        features[y * per : (y + 1) * per] = centers[y] + noise
    labels = np.repeat(np.arange(k), per)
    return LabeledBatch(features, labels, k)
