"""Labeled tabular datasets: CSV loading, stratified splitting, record removal."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class DatasetError(Exception):
    """Raised for malformed input files or invalid dataset operations."""


@dataclass(frozen=True)
class LabeledDataset:
    """Numeric attribute matrix plus integer-encoded class labels.

    ``records`` has shape (n, d) float64, ``labels`` shape (n,) int64 with
    values indexing into ``classes``.  ``classes`` holds the original label
    strings sorted lexicographically, so the encoding is stable across files
    that contain the same label set.
    """

    records: np.ndarray
    labels: np.ndarray
    classes: tuple[str, ...]
    columns: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.records.ndim != 2:
            raise DatasetError("records must be a 2-d array")
        if self.labels.shape != (self.records.shape[0],):
            raise DatasetError("labels must align with records")
        if self.records.shape[0] == 0:
            raise DatasetError("dataset has no records")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.classes)):
            raise DatasetError("label index out of range")
        self.records.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.records.shape[0]

    @property
    def d(self) -> int:
        return self.records.shape[1]

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def class_counts(self) -> np.ndarray:
        """Per-class record counts, aligned with ``classes``."""
        return np.bincount(self.labels, minlength=self.num_classes).astype(np.int64)

    def majority_class(self) -> int:
        """Index of the most frequent class; ties go to the lower index."""
        return int(np.argmax(self.class_counts()))

    def take(self, indices: np.ndarray) -> "LabeledDataset":
        """Dataset restricted to ``indices`` (order preserved)."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.records[idx].copy(), self.labels[idx].copy(),
                              self.classes, self.columns)


@dataclass(frozen=True)
class SplitSpec:
    """Parameters for a stratified train/test partition."""

    train_fraction: float
    seed: int
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise DatasetError("train_fraction must lie strictly between 0 and 1")


def load_csv(path: str, label_column: str | int | None = None) -> LabeledDataset:
    """Load a headered CSV where one column holds class labels.

    ``label_column`` selects the label column by header name or 0-based
    position; by default the last column is used.  All other cells must parse
    as finite floats; a bad cell is reported with its row and column.
    """
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: file is empty") from None
        rows = [row for row in reader if row]

    if not header:
        raise DatasetError(f"{path}: header row is empty")
    label_idx = _resolve_label_column(header, label_column, path)
    attr_idx = [i for i in range(len(header)) if i != label_idx]
    if not attr_idx:
        raise DatasetError(f"{path}: no attribute columns besides the label")
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    n, d = len(rows), len(attr_idx)
    records = np.empty((n, d), dtype=np.float64)
    raw_labels: list[str] = []
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise DatasetError(f"{path}: row {r + 1} has {len(row)} fields, expected {len(header)}")
        for j, c in enumerate(attr_idx):
            cell = row[c]
            try:
                value = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: row {r + 1}, column {header[c]!r}: "
                    f"cannot parse {cell!r} as a number") from None
            if not np.isfinite(value):
                raise DatasetError(
                    f"{path}: row {r + 1}, column {header[c]!r}: non-finite value {cell!r}")
            records[r, j] = value
        raw_labels.append(row[label_idx])

    classes = tuple(sorted(set(raw_labels)))
    encoding = {name: k for k, name in enumerate(classes)}
    labels = np.array([encoding[s] for s in raw_labels], dtype=np.int64)
    columns = tuple(header[c] for c in attr_idx)
    return LabeledDataset(records, labels, classes, columns)


def _resolve_label_column(header: list[str], label_column, path: str) -> int:
    if label_column is None:
        return len(header) - 1
    if isinstance(label_column, int):
        if not 0 <= label_column < len(header):
            raise DatasetError(f"{path}: label column index {label_column} out of range")
        return label_column
    hits = [i for i, name in enumerate(header) if name == label_column]
    if not hits:
        raise DatasetError(f"{path}: no column named {label_column!r}")
    if len(hits) > 1:
        raise DatasetError(f"{path}: column name {label_column!r} is ambiguous")
    return hits[0]


def write_csv(data: LabeledDataset, path: str, label_column: str = "class") -> None:
    """Write the dataset back out in the format :func:`load_csv` accepts."""
    columns = data.columns or tuple(f"x{j}" for j in range(data.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(columns) + [label_column])
        for i in range(data.n):
            row = [repr(v) for v in data.records[i].tolist()]
            row.append(data.classes[data.labels[i]])
            writer.writerow(row)


def stratified_split(data: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Partition into train/test keeping per-class proportions.

    Each class contributes round(train_fraction * count) records to the train
    side, with halves rounding up.  Which records go where is decided by a
    seeded per-class shuffle; within each side the original record order is
    preserved.  Every class must have at least 2 records so both sides are hit.
    """
    counts = data.class_counts()
    if data.num_classes < 2 or np.count_nonzero(counts) < 2:
        raise DatasetError("stratified split requires at least two classes present")
    if spec.stratified and counts.min() < 2:
        raise DatasetError("every class needs at least 2 records to stratify")

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    train_mask = np.zeros(data.n, dtype=bool)
    if spec.stratified:
        for c in range(data.num_classes):
            members = np.flatnonzero(data.labels == c)
            # round-half-up keeps 3.5 -> 4 regardless of float banker's rounding
            k = int(np.floor(spec.train_fraction * members.size + 0.5))
            k = min(max(k, 1), members.size - 1)
            chosen = rng.permutation(members.size)[:k]
            train_mask[members[chosen]] = True
    else:
        k = int(np.floor(spec.train_fraction * data.n + 0.5))
        k = min(max(k, 1), data.n - 1)
        chosen = rng.permutation(data.n)[:k]
        train_mask[chosen] = True

    train_idx = np.flatnonzero(train_mask)
    test_idx = np.flatnonzero(~train_mask)
    return data.take(train_idx), data.take(test_idx)


def remove_records(data: LabeledDataset, indices: np.ndarray) -> LabeledDataset | None:
    """Dataset without the rows named by ``indices``; None when all rows go.

    Indices must be unique and in range.  Remaining records keep their
    relative order.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return data.take(np.arange(data.n))
    if idx.min() < 0 or idx.max() >= data.n:
        raise DatasetError("removal index out of range")
    if np.unique(idx).size != idx.size:
        raise DatasetError("removal indices must be unique")
    keep = np.ones(data.n, dtype=bool)
    keep[idx] = False
    if not keep.any():
        return None
    return data.take(np.flatnonzero(keep))
