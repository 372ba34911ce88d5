"""Hamming distance, frequency tables, modes and the SD quality metric.

All distance totals are exact Python/NumPy integers.  SD becomes a
``Fraction`` and is only rounded when a report is written.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dataset import CategoricalDataset, ContractError

# bounds the size of the (rows, K, m) comparison block built per chunk
_BLOCK_CELLS = 1 << 22
_ROW_CHUNK = 1 << 16


def hamming(x, y) -> int:
    """Number of attribute positions where ``x`` and ``y`` differ."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ContractError(f"length mismatch: {x.shape} vs {y.shape}")
    return int(np.count_nonzero(x != y))


def distances_to(codes: np.ndarray, center) -> np.ndarray:
    """Hamming distance of every row of ``codes`` to one center (int64)."""
    center = np.asarray(center, dtype=codes.dtype)
    if codes.ndim != 2 or center.shape != (codes.shape[1],):
        raise ContractError("center length must equal the attribute count")
    return np.count_nonzero(codes != center, axis=1).astype(np.int64)


def distance_matrix(codes: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """``(rows, K)`` matrix of Hamming distances, computed in bounded blocks."""
    centers = np.asarray(centers, dtype=codes.dtype)
    n, m = codes.shape
    k = centers.shape[0]
    out = np.empty((n, k), dtype=np.int64)
    step = max(1, _BLOCK_CELLS // max(1, k * m))
    for lo in range(0, n, step):
        block = codes[lo:lo + step]
        out[lo:lo + step] = np.count_nonzero(
            block[:, None, :] != centers[None, :, :], axis=2)
    return out


@dataclass
class FrequencyTable:
    """Per-attribute category counts for one group of rows.

    ``counts[i][c]`` is how many aggregated rows carry code ``c`` at
    attribute ``i``.  Each per-attribute array sums to ``size``.
    """

    counts: list[np.ndarray]
    size: int = 0

    @classmethod
    def empty(cls, cardinalities) -> FrequencyTable:
        return cls([np.zeros(int(c), dtype=np.int64) for c in cardinalities], 0)

    def copy(self) -> FrequencyTable:
        return FrequencyTable([c.copy() for c in self.counts], self.size)

    def __eq__(self, other):
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return self.size == other.size and len(self.counts) == len(other.counts) and all(
            np.array_equal(a, b) for a, b in zip(self.counts, other.counts))


def freq_build(dataset: CategoricalDataset, subset=None) -> FrequencyTable:
    codes = dataset.codes if subset is None else dataset.codes[np.asarray(subset, dtype=np.int64)]
    counts = [np.bincount(codes[:, i], minlength=int(card)).astype(np.int64)
              for i, card in enumerate(dataset.cardinalities.tolist())]
    return FrequencyTable(counts, int(codes.shape[0]))


def freq_update(table: FrequencyTable, point, delta: int) -> FrequencyTable:
    """Add (``delta=+1``) or remove (``delta=-1``) one point, in place.

    The table is returned for chaining.  Removing a point that is not
    counted raises before anything is modified.
    """
    if delta not in (1, -1):
        raise ContractError("delta must be +1 or -1")
    point = np.asarray(point)
    if point.shape != (len(table.counts),):
        raise ContractError("point length must equal the attribute count")
    if delta < 0:
        if table.size < 1 or any(table.counts[i][c] < 1 for i, c in enumerate(point.tolist())):
            raise ContractError("frequency count would drop below zero")
    for i, c in enumerate(point.tolist()):
        table.counts[i][c] += delta
    table.size += delta
    return table


def mode_of(table: FrequencyTable) -> np.ndarray:
    """Most frequent code per attribute; ties go to the lowest code."""
    if table.size < 1:
        raise ContractError("mode of empty cluster")
    # argmax returns the first maximal index, which is the lowest code
    return np.array([int(np.argmax(c)) for c in table.counts], dtype=np.uint8)


def mode_of_rows(codes: np.ndarray, cardinalities) -> np.ndarray:
    """Mode of a block of rows without building an intermediate table."""
    if codes.shape[0] < 1:
        raise ContractError("mode of empty cluster")
    return np.array([int(np.argmax(np.bincount(codes[:, i], minlength=int(card))))
                     for i, card in enumerate(cardinalities)], dtype=np.uint8)


def sum_of_distances(dataset: CategoricalDataset, subset, center) -> int:
    codes = dataset.codes if subset is None else dataset.codes[np.asarray(subset, dtype=np.int64)]
    return int(distances_to(codes, center).sum())


def total_distance(dataset: CategoricalDataset, centers, assignments) -> int:
    """Exact sum of each row's distance to its assigned center."""
    centers = np.asarray(centers, dtype=np.uint8)
    assignments = np.asarray(assignments, dtype=np.int64)
    if assignments.shape != (dataset.n,):
        raise ContractError("assignments must cover every row")
    if assignments.size and (assignments.min() < 0 or assignments.max() >= centers.shape[0]):
        raise ContractError("assignment refers to a missing cluster")
    total = 0
    for lo in range(0, dataset.n, _ROW_CHUNK):
        hi = lo + _ROW_CHUNK
        total += int(np.count_nonzero(dataset.codes[lo:hi] != centers[assignments[lo:hi]]))
    return total


def sd_total(dataset: CategoricalDataset, model) -> Fraction:
    """Mean distance of every point to its cluster center, as an exact fraction."""
    return Fraction(total_distance(dataset, model.centers, model.assignments), dataset.n)
