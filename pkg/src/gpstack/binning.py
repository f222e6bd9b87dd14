"""Histogram binning of program outputs, bin purity, and fitness scoring.

A trained program maps every record to a real number.  Those numbers are
dropped into a histogram, and each occupied bin is judged by how class-pure
it is.  Two geometries exist:

* ``fixed``: the output range [min, max] seen at fit time is divided into
  ``num_bin`` equal intervals; bin keys are the interval indices.
* ``float32``: outputs are rounded to single precision and every distinct
  rounded value is its own bin; bin keys are the float32 bit patterns.
  Capacity is 2**32 but only occupied bins are stored.

Histograms store occupied bins only, in ascending order of representative
value.  Empty bins are implicit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .programs import ProgramTree, eval_batch

FLOAT32_CAPACITY = 2 ** 32


class BinType(enum.Enum):
    EMPTY = "empty"
    PURE = "pure"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class IntervalGeometry:
    """Where bins live on the output axis.

    ``lo``/``hi`` are the output extremes observed at fit time.  For fixed
    mode they define the interval edges; for float32 mode they are
    informational only.
    """

    mode: str
    lo: float
    hi: float
    num_bin: int

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "float32"):
            raise ValueError(f"unknown binning mode {self.mode!r}")
        if self.mode == "fixed" and self.num_bin < 1:
            raise ValueError("fixed mode needs at least one bin")

    @property
    def capacity(self) -> int:
        return self.num_bin if self.mode == "fixed" else FLOAT32_CAPACITY

    @property
    def width(self) -> float:
        if self.mode != "fixed":
            raise ValueError("width is defined for fixed mode only")
        return (self.hi - self.lo) / self.num_bin


@dataclass(frozen=True)
class FitnessConfig:
    """Binning geometry plus the scoring knobs used while evolving."""

    beta: float = 0.99
    alpha: float = 0.0
    num_bin: int = 2
    float_resolution: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.alpha < 0.0:
            raise ValueError("alpha must be non-negative")
        if self.num_bin < 1:
            raise ValueError("num_bin must be at least 1")


@dataclass(frozen=True)
class BinStats:
    """Per-class counts of one bin."""

    key: int
    rep: float
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def majority_class(self) -> int:
        return int(np.argmax(self.counts))

    @property
    def y_star(self) -> int:
        return max(self.counts)


@dataclass(frozen=True)
class PureBin:
    key: int
    rep: float
    label: int
    total: int
    y_star: int


@dataclass(frozen=True)
class AmbiguousBin:
    key: int
    rep: float


@dataclass(frozen=True)
class BinHistogram:
    """Occupied bins of one program over one dataset.

    ``keys``, ``reps`` and ``counts`` are aligned and ordered by ascending
    representative value.  ``record_inverse[i]`` is the position of record
    i's bin within those arrays, so per-record bin membership is O(1).
    """

    geometry: IntervalGeometry
    keys: np.ndarray
    reps: np.ndarray
    counts: np.ndarray
    record_inverse: np.ndarray
    n_records: int
    num_classes: int

    @property
    def used_bins(self) -> int:
        return int(self.keys.size)

    def bin_stats(self, position: int) -> BinStats:
        """Stats of the occupied bin at ``position`` (rep order)."""
        return BinStats(int(self.keys[position]), float(self.reps[position]),
                        tuple(int(c) for c in self.counts[position]))

    def record_keys(self) -> np.ndarray:
        """Bin key of every record, in record order."""
        return self.keys[self.record_inverse]


def locate_bins(geom: IntervalGeometry, values: np.ndarray) -> np.ndarray:
    """Bin key for each output value under ``geom``, as int64.

    Fixed mode clamps out-of-range values into the edge bins, so keys are
    always valid even for outputs never seen at fit time.  A degenerate
    range (hi == lo) puts everything in bin 0.  Float32 mode returns the bit
    pattern of the single-precision value, with -0.0 normalized to +0.0.
    """
    values = np.asarray(values, dtype=np.float64)
    if geom.mode == "fixed":
        if geom.hi <= geom.lo:
            return np.zeros(values.shape, dtype=np.int64)
        idx = np.floor((values - geom.lo) / geom.width)
        return np.clip(idx, 0, geom.num_bin - 1).astype(np.int64)
    v = values.astype(np.float32)
    v[v == 0] = np.float32(0.0)
    return v.view(np.uint32).astype(np.int64)


def key_reps(geom: IntervalGeometry, keys: np.ndarray) -> np.ndarray:
    """Representative output value of each bin key.

    Fixed-mode bins are represented by their interval midpoint, float32 bins
    by the rounded value itself.
    """
    keys = np.asarray(keys, dtype=np.int64)
    if geom.mode == "fixed":
        if geom.hi <= geom.lo:
            return np.full(keys.shape, geom.lo, dtype=np.float64)
        return geom.lo + (keys + 0.5) * geom.width
    return keys.astype(np.uint32).view(np.float32).astype(np.float64)


def fit_histogram(tree: ProgramTree, data: LabeledDataset, cfg: FitnessConfig) -> BinHistogram:
    """Run ``tree`` over every record and histogram the outputs.

    The geometry is anchored to this dataset: fixed mode spans the observed
    [min, max] of the outputs, float32 mode records it for reference.  The
    returned geometry is what must be reused to bin unseen records later.
    """
    y = eval_batch(tree, data.records)
    lo, hi = float(y.min()), float(y.max())
    if cfg.float_resolution:
        geom = IntervalGeometry("float32", lo, hi, FLOAT32_CAPACITY)
        v = y.astype(np.float32)
        v[v == 0] = np.float32(0.0)
        vals, inverse = np.unique(v, return_inverse=True)
        reps = vals.astype(np.float64)
        keys = vals.view(np.uint32).astype(np.int64)
    else:
        geom = IntervalGeometry("fixed", lo, hi, cfg.num_bin)
        keys_all = locate_bins(geom, y)
        keys, inverse = np.unique(keys_all, return_inverse=True)
        reps = key_reps(geom, keys)
    C = data.num_classes
    counts = np.bincount(inverse.astype(np.int64) * C + data.labels,
                         minlength=keys.size * C).reshape(keys.size, C)
    return BinHistogram(geom, keys, reps, counts,
                        inverse.astype(np.int32), data.n, C)


def classify_bin(stats: BinStats, beta: float) -> BinType:
    """Empty, pure, or ambiguous: pure means the majority class holds at
    least a ``beta`` fraction of the bin's records."""
    if stats.total == 0:
        return BinType.EMPTY
    if stats.y_star / stats.total >= beta:
        return BinType.PURE
    return BinType.AMBIGUOUS


def pure_mask(hist: BinHistogram, beta: float) -> np.ndarray:
    """Boolean mask over occupied bins: True where the bin is pure.

    Uses the same division test as :func:`classify_bin` so the two never
    disagree on borderline bins.
    """
    totals = hist.counts.sum(axis=1)
    y_star = hist.counts.max(axis=1)
    return y_star / totals >= beta


def bin_table(hist: BinHistogram, beta: float) -> tuple[tuple[PureBin, ...], tuple[AmbiguousBin, ...]]:
    """Split occupied bins into the pure and ambiguous tables, rep order."""
    totals = hist.counts.sum(axis=1)
    y_star = hist.counts.max(axis=1)
    labels = hist.counts.argmax(axis=1)
    pure = y_star / totals >= beta
    pure_bins = tuple(
        PureBin(int(hist.keys[i]), float(hist.reps[i]), int(labels[i]),
                int(totals[i]), int(y_star[i]))
        for i in np.flatnonzero(pure))
    ambiguous = tuple(
        AmbiguousBin(int(hist.keys[i]), float(hist.reps[i]))
        for i in np.flatnonzero(~pure))
    return pure_bins, ambiguous


def gini_fitness(hist: BinHistogram, class_counts: np.ndarray, alpha: float) -> float:
    """Purity-weighted fitness of a histogram; higher is fitter.

    Each occupied bin i contributes, for each class c present in the data,

        (count(i, c) / (total(i) * n_c))**2 * n_c

    where n_c is the dataset-wide size of class c.  A perfectly separating
    histogram scores 1.0 for two balanced classes; lumping everything into
    one bin scores lower.  On top of that, a usage bonus of

        alpha * used_bins / min(capacity, n_records)

    rewards programs that spread records over more bins.
    """
    inst = np.asarray(class_counts, dtype=np.float64)
    if inst.shape != (hist.num_classes,):
        raise ValueError("class_counts must align with the histogram's classes")
    counts = hist.counts.astype(np.float64)
    active = inst > 0
    if counts[:, ~active].any():
        raise ValueError("histogram contains records of a class with zero count")
    totals = counts.sum(axis=1)
    frac = counts[:, active] / (totals[:, None] * inst[None, active])
    gini = float((frac * frac * inst[None, active]).sum())
    used = hist.used_bins / min(hist.geometry.capacity, hist.n_records)
    return gini + alpha * used


def nearest_pure_bin(pure_bins, query: float):
    """The pure bin whose representative is closest to ``query``.

    ``pure_bins`` must be ordered by ascending representative.  Exact
    distance ties go to the lower representative.  Returns None when the
    table is empty.
    """
    if not pure_bins:
        return None
    reps = np.array([b.rep for b in pure_bins], dtype=np.float64)
    return pure_bins[int(nearest_positions(reps, np.array([query]))[0])]


def nearest_positions(sorted_reps: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of the nearest value in ``sorted_reps`` for each query.

    Ties go to the smaller value.  Vectorized companion of
    :func:`nearest_pure_bin`.
    """
    pos = np.searchsorted(sorted_reps, queries)
    left = np.clip(pos - 1, 0, sorted_reps.size - 1)
    right = np.clip(pos, 0, sorted_reps.size - 1)
    take_left = np.abs(queries - sorted_reps[left]) <= np.abs(sorted_reps[right] - queries)
    return np.where(take_left, left, right)


def match_positions(sorted_vals: np.ndarray, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact membership of ``queries`` in a sorted array.

    Returns (found mask, position of the match where found).
    """
    pos = np.searchsorted(sorted_vals, queries)
    pos_c = np.clip(pos, 0, sorted_vals.size - 1)
    found = (pos < sorted_vals.size) & (sorted_vals[pos_c] == queries) if sorted_vals.size \
        else np.zeros(queries.shape, dtype=bool)
    return found, pos_c
