"""In-memory categorical dataset: an n x m block of one-byte attribute codes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MAX_CARDINALITY = 256


class ContractError(ValueError):
    """Raised when a caller violates an operation's preconditions."""


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    row: int | None = None
    column: int | None = None


@dataclass(frozen=True, eq=False)
class CategoricalDataset:
    """Row-major matrix of compact codes plus per-attribute cardinalities.

    ``codes`` is a C-contiguous ``uint8`` array of shape ``(n, m)``; the code at
    column ``i`` lies in ``[0, cardinalities[i])``.  The arrays are marked
    read-only so the dataset can be shared freely between threads.
    """

    codes: np.ndarray
    cardinalities: np.ndarray
    attribute_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        codes = np.ascontiguousarray(self.codes, dtype=np.uint8)
        cards = np.asarray(self.cardinalities, dtype=np.int64).copy()
        if codes.ndim != 2:
            raise ContractError(f"codes must be 2-D, got shape {codes.shape}")
        if cards.shape != (codes.shape[1],):
            raise ContractError(
                f"expected {codes.shape[1]} cardinalities, got {cards.shape}")
        names = tuple(self.attribute_names) or tuple(
            f"a{i}" for i in range(codes.shape[1]))
        if len(names) != codes.shape[1]:
            raise ContractError(
                f"expected {codes.shape[1]} attribute names, got {len(names)}")
        codes.flags.writeable = False
        cards.flags.writeable = False
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "attribute_names", names)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cardinalities=None,
                  attribute_names=(), check: bool = True) -> CategoricalDataset:
        """Build a dataset from nested row lists.

        Cardinalities default to ``max code + 1`` per column.
        """
        arr = np.asarray(rows, dtype=np.int64)
        if arr.ndim != 2:
            raise ContractError("rows must form a rectangular 2-D table")
        if (arr < 0).any() or (arr > 255).any():
            raise ContractError("codes must lie in [0, 255]")
        if cardinalities is None:
            cardinalities = arr.max(axis=0) + 1 if arr.size else np.zeros(arr.shape[1])
        ds = cls(arr.astype(np.uint8), np.asarray(cardinalities), attribute_names)
        if check:
            problems = validate(ds)
            if problems:
                raise ContractError(problems[0].message)
        return ds

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def m(self) -> int:
        return self.codes.shape[1]

    def __len__(self):
        return self.n

    def subset(self, indices) -> np.ndarray:
        """Codes of the rows in ``indices`` (a fresh array)."""
        return self.codes[indices]

    def all_rows(self) -> np.ndarray:
        return np.arange(self.n, dtype=np.int64)


def row(dataset: CategoricalDataset, i: int) -> np.ndarray:
    """Return row ``i`` as a read-only view."""
    if not 0 <= i < dataset.n:
        raise ContractError(f"row index {i} out of range for n={dataset.n}")
    return dataset.codes[i]


def row_subset(indices, n: int | None = None) -> np.ndarray:
    """Normalise ``indices`` into a strictly increasing int64 index array.

    Cluster membership is always carried as indices into the dataset, never
    as copied rows.
    """
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size > 1 and not (np.diff(idx) > 0).all():
        raise ContractError("row subset indices must be strictly increasing")
    if idx.size and (idx[0] < 0 or (n is not None and idx[-1] >= n)):
        raise ContractError("row subset index out of range")
    return idx


def validate(dataset: CategoricalDataset) -> list[Violation]:
    """Collect every invariant violation; an empty list means the dataset is valid."""
    out: list[Violation] = []
    if dataset.n < 1:
        out.append(Violation("shape", "dataset has no rows"))
    if dataset.m < 1:
        out.append(Violation("shape", "dataset has no attributes"))
    for i, card in enumerate(dataset.cardinalities.tolist()):
        if card > MAX_CARDINALITY:
            out.append(Violation(
                "cardinality",
                f"cardinality exceeds {MAX_CARDINALITY} at column {i} ({card})",
                column=i))
        elif card < 1:
            out.append(Violation(
                "cardinality", f"cardinality must be >= 1 at column {i}", column=i))
    if dataset.n and dataset.m:
        bad_r, bad_c = np.nonzero(dataset.codes >= dataset.cardinalities[None, :])
        for r, c in zip(bad_r.tolist(), bad_c.tolist()):
            out.append(Violation(
                "code",
                f"code {int(dataset.codes[r, c])} out of range at row {r}, "
                f"column {c} (cardinality {int(dataset.cardinalities[c])})",
                row=r, column=c))
    return out
