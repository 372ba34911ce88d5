"""Lloyd-style K-Modes: alternate nearest-center assignment and mode update."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from ._parallel import map_row_chunks
from .dataset import CategoricalDataset, ContractError
from .metric import distance_matrix, total_distance

RESEED_FARTHEST = "reseed-farthest"
EMPTY_CLUSTER_POLICIES = (RESEED_FARTHEST,)


@dataclass(frozen=True)
class EngineConfig:
    max_iterations: int = 300
    empty_cluster_policy: str = RESEED_FARTHEST
    # None defers to BKMODES_THREADS
    threads: Optional[int] = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ContractError("max_iterations must be >= 1")
        if self.empty_cluster_policy not in EMPTY_CLUSTER_POLICIES:
            raise ContractError(f"unknown empty-cluster policy {self.empty_cluster_policy!r}")
        if self.threads is not None and self.threads < 1:
            raise ContractError("threads must be >= 1")


@dataclass
class ClusterModel:
    k: int
    centers: np.ndarray
    assignments: np.ndarray
    total_distance: int
    iterations: int
    converged: bool

    @property
    def n(self) -> int:
        return int(self.assignments.shape[0])

    @property
    def sd(self) -> Fraction:
        return Fraction(self.total_distance, self.n)

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def _as_centers(centers, m: int) -> np.ndarray:
    arr = np.array(centers, dtype=np.int64, ndmin=2)
    if arr.shape[0] < 1 or arr.shape[1] != m:
        raise ContractError(f"centers must have shape (K>=1, {m}), got {arr.shape}")
    if (arr < 0).any() or (arr > 255).any():
        raise ContractError("center codes must lie in [0, 255]")
    return arr.astype(np.uint8)


def assign_step(dataset: CategoricalDataset, centers, previous=None,
                threads: int | None = None) -> tuple[np.ndarray, int]:
    """Assign every row to a nearest center.

    A row whose previous cluster is among its nearest centers keeps it;
    otherwise the lowest cluster index wins.  Returns the new assignments and
    how many rows changed cluster (all of them when there is no previous).
    """
    centers = _as_centers(centers, dataset.m)
    if previous is not None:
        previous = np.asarray(previous, dtype=np.int64)
        if previous.shape != (dataset.n,):
            raise ContractError("previous assignments must cover every row")

    def work(lo, hi):
        dist = distance_matrix(dataset.codes[lo:hi], centers)
        best = dist.argmin(axis=1)
        if previous is not None:
            prev = previous[lo:hi]
            stay = dist[np.arange(hi - lo), prev] == dist[np.arange(hi - lo), best]
            best = np.where(stay, prev, best)
        return best

    parts = map_row_chunks(work, dataset.n, threads)
    assignments = np.concatenate(parts).astype(np.int64) if parts else np.empty(0, np.int64)
    changed = dataset.n if previous is None else int(np.count_nonzero(assignments != previous))
    return assignments, changed


def cluster_modes(dataset: CategoricalDataset, assignments: np.ndarray, k: int) -> np.ndarray:
    """Mode of each cluster (lowest code on ties); empty clusters get all-zero rows."""
    modes = np.zeros((k, dataset.m), dtype=np.uint8)
    for i, card in enumerate(dataset.cardinalities.tolist()):
        counts = np.bincount(assignments * card + dataset.codes[:, i],
                             minlength=k * card).reshape(k, card)
        modes[:, i] = counts.argmax(axis=1)
    return modes


def reseed_empty(dataset: CategoricalDataset, assignments: np.ndarray, k: int,
                 current_centers) -> tuple[np.ndarray, list[int]]:
    """Give every empty cluster the row farthest from its current center.

    The chosen row leaves its donor cluster.  Rows in singleton clusters are
    never taken, so a reseed cannot empty another cluster.  Ties go to the
    lowest row index.  Returns the (copied) assignments and the rows moved.
    """
    assignments = assignments.copy()
    centers = _as_centers(current_centers, dataset.m)
    sizes = np.bincount(assignments, minlength=k)
    empty = np.flatnonzero(sizes == 0)
    if empty.size == 0:
        return assignments, []
    dist = np.count_nonzero(dataset.codes != centers[assignments], axis=1).astype(np.int64)
    moved = []
    for j in empty.tolist():
        eligible = sizes[assignments] >= 2
        if not eligible.any():
            raise ContractError("more clusters than points")
        score = np.where(eligible, dist, -1)
        r = int(np.argmax(score))
        sizes[assignments[r]] -= 1
        sizes[j] += 1
        assignments[r] = j
        dist[r] = 0
        moved.append(r)
    return assignments, moved


def update_step(dataset: CategoricalDataset, assignments, k: int, current_centers=None,
                policy: str = RESEED_FARTHEST) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Recompute every center as its cluster mode.

    Returns ``(centers, assignments, reseeded_rows)``; assignments differ from
    the input only when an empty cluster had to be reseeded.
    """
    assignments = np.asarray(assignments, dtype=np.int64)
    if assignments.shape != (dataset.n,):
        raise ContractError("assignments must cover every row")
    if assignments.size and (assignments.min() < 0 or assignments.max() >= k):
        raise ContractError("assignment refers to a missing cluster")
    if policy != RESEED_FARTHEST:
        raise ContractError(f"unknown empty-cluster policy {policy!r}")
    moved: list[int] = []
    if (np.bincount(assignments, minlength=k) == 0).any():
        if current_centers is None:
            raise ContractError("reseeding an empty cluster needs the current centers")
        assignments, moved = reseed_empty(dataset, assignments, k, current_centers)
    return cluster_modes(dataset, assignments, k), assignments, moved


StepHook = Callable[[str, int, np.ndarray, np.ndarray], None]


def kmodes_fit(dataset: CategoricalDataset, initial_centers,
               config: EngineConfig | None = None,
               on_step: StepHook | None = None) -> ClusterModel:
    """Run K-Modes from ``initial_centers`` until assignments stop changing.

    ``iterations`` counts assignment passes.  The loop ends at the first pass
    that moves no row, or right after an update that leaves every center
    unchanged (the next pass would then be a provable no-op, so it is not
    run).  ``on_step(phase, total, centers, assignments)`` is called after
    each assign and update half-step.
    """
    config = config or EngineConfig()
    centers = _as_centers(initial_centers, dataset.m)
    k = centers.shape[0]
    if k > dataset.n:
        raise ContractError("more clusters than points")

    assignments = None
    iterations = 0
    converged = False
    while iterations < config.max_iterations:
        new_assign, changed = assign_step(dataset, centers, assignments, config.threads)
        iterations += 1
        if on_step is not None:
            on_step("assign", total_distance(dataset, centers, new_assign), centers, new_assign)
        if assignments is not None and changed == 0:
            converged = True
            break
        assignments = new_assign
        new_centers, assignments, moved = update_step(
            dataset, assignments, k, centers, config.empty_cluster_policy)
        if on_step is not None:
            on_step("update", total_distance(dataset, new_centers, assignments),
                    new_centers, assignments)
        fixed = not moved and np.array_equal(new_centers, centers)
        centers = new_centers
        if fixed:
            converged = True
            break

    return ClusterModel(
        k=k,
        centers=centers,
        assignments=assignments,
        total_distance=total_distance(dataset, centers, assignments),
        iterations=iterations,
        converged=converged,
    )
