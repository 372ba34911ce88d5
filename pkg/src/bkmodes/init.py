"""Initial-center strategies for K-Modes.

* ``random_init``: distinct data rows drawn by a seeded PCG64 generator.
* ``farthest_point_init``: greedy max-min (He, 2006), first center by
  attribute-frequency score.
* ``cao_init``: density times distance (Cao, Liang and Bai, 2009).
* ``bkmodes_init``: bisecting K-Modes.  Start from the whole dataset, split
  the cluster with the largest within-cluster distance sum using a
  two-center K-Modes run, and repeat until K clusters exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .dataset import CategoricalDataset, ContractError
from .engine import EngineConfig, kmodes_fit
from .metric import distances_to, freq_build, mode_of_rows

METHODS = ("random", "farthest", "cao", "bkmodes")


class InitError(ContractError):
    """The requested number of centers cannot be produced from this data."""


class NotBisectableError(InitError):
    pass


@dataclass(frozen=True)
class InitMethod:
    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in METHODS:
            raise ContractError(f"unknown init method {self.kind!r}; choose from {METHODS}")
        if (self.kind == "random") != (self.seed is not None):
            raise ContractError("a seed is required for random init and only for random init")


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 seeded from one 64-bit integer; identical streams on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def _check_k(dataset: CategoricalDataset, k: int):
    if k < 1:
        raise ContractError("k must be >= 1")
    if k > dataset.n:
        raise InitError("more clusters than points")


def random_init(dataset: CategoricalDataset, k: int, seed: int) -> np.ndarray:
    """Pick ``k`` distinct rows in the order a seeded permutation visits them."""
    _check_k(dataset, k)
    order = make_rng(seed).permutation(dataset.n)
    seen: set[bytes] = set()
    picked = []
    for r in order.tolist():
        key = dataset.codes[r].tobytes()
        if key in seen:
            continue
        seen.add(key)
        picked.append(r)
        if len(picked) == k:
            return dataset.codes[picked].copy()
    raise InitError(f"k={k} exceeds the {len(seen)} distinct rows in the dataset")


def frequency_scores(dataset: CategoricalDataset) -> np.ndarray:
    """Per row, the sum over attributes of how many rows share its value."""
    table = freq_build(dataset)
    score = np.zeros(dataset.n, dtype=np.int64)
    for i, counts in enumerate(table.counts):
        score += counts[dataset.codes[:, i]]
    return score


def farthest_point_init(dataset: CategoricalDataset, k: int) -> np.ndarray:
    _check_k(dataset, k)
    first = int(np.argmax(frequency_scores(dataset)))
    chosen = [first]
    nearest = distances_to(dataset.codes, dataset.codes[first])
    nearest[first] = -1
    while len(chosen) < k:
        r = int(np.argmax(nearest))
        chosen.append(r)
        nearest = np.minimum(nearest, distances_to(dataset.codes, dataset.codes[r]))
        nearest[chosen] = -1
    return dataset.codes[chosen].copy()


def cao_density_counts(dataset: CategoricalDataset) -> np.ndarray:
    """``m`` times the Cao density, kept as exact integers."""
    return frequency_scores(dataset)


def cao_density(dataset: CategoricalDataset) -> np.ndarray:
    """Average over attributes of the number of rows matching each row's value."""
    return cao_density_counts(dataset) / dataset.m


def cao_init(dataset: CategoricalDataset, k: int, return_rows: bool = False):
    """Max-density row first, then repeatedly the non-center row maximising
    ``min over chosen centers of d(x, c) * Dens(x)``.  Ties go to the lowest row.
    """
    _check_k(dataset, k)
    dens = cao_density_counts(dataset)
    first = int(np.argmax(dens))
    chosen = [first]
    # min_c d(x,c)*Dens(x) == Dens(x) * min_c d(x,c) since Dens(x) >= 0
    nearest = distances_to(dataset.codes, dataset.codes[first])
    while len(chosen) < k:
        score = nearest * dens
        score[chosen] = -1
        r = int(np.argmax(score))
        chosen.append(r)
        nearest = np.minimum(nearest, distances_to(dataset.codes, dataset.codes[r]))
    centers = dataset.codes[chosen].copy()
    return (centers, chosen) if return_rows else centers


class Bisection(NamedTuple):
    left: np.ndarray
    right: np.ndarray
    left_center: np.ndarray
    right_center: np.ndarray


def two_modes_bisect(dataset: CategoricalDataset, subset, config: EngineConfig | None = None,
                     ) -> Bisection:
    """Split ``subset`` in two with K-Modes seeded by its mode and the row farthest from it."""
    rows = np.asarray(subset, dtype=np.int64)
    if rows.size < 2:
        raise NotBisectableError("cluster not bisectable: fewer than two rows")
    codes = dataset.codes[rows]
    c1 = mode_of_rows(codes, dataset.cardinalities.tolist())
    dist = distances_to(codes, c1)
    far = int(np.argmax(dist))
    if dist[far] == 0:
        raise NotBisectableError("cluster not bisectable: all rows identical")
    sub = CategoricalDataset(codes, dataset.cardinalities, dataset.attribute_names)
    model = kmodes_fit(sub, np.stack([c1, codes[far]]), config)
    return Bisection(rows[model.assignments == 0], rows[model.assignments == 1],
                     model.centers[0], model.centers[1])


@dataclass
class Cluster:
    rows: np.ndarray
    center: np.ndarray
    cost: int

    @property
    def bisectable(self) -> bool:
        # center is the cluster mode, so a zero cost means every row is identical
        return self.cost > 0


@dataclass
class BisectState:
    clusters: list[Cluster]
    # position (in the previous state's list) of the cluster that was split
    split_position: int | None = None
    split: Cluster | None = field(default=None, repr=False)

    @property
    def j(self) -> int:
        return len(self.clusters)

    def centers(self) -> np.ndarray:
        return np.stack([c.center for c in self.clusters])


def _cluster(dataset: CategoricalDataset, rows: np.ndarray, center=None) -> Cluster:
    codes = dataset.codes[rows]
    if center is None:
        center = mode_of_rows(codes, dataset.cardinalities.tolist())
    return Cluster(rows, np.asarray(center, dtype=np.uint8), int(distances_to(codes, center).sum()))


def select_cluster(clusters: list[Cluster]) -> int:
    """Position of the bisectable cluster with the largest cost (earliest on ties)."""
    best = None
    for pos, c in enumerate(clusters):
        if c.bisectable and (best is None or c.cost > clusters[best].cost):
            best = pos
    if best is None:
        raise InitError("cannot produce K clusters: no bisectable cluster left")
    return best


def bisecting_states(dataset: CategoricalDataset, k: int,
                     config: EngineConfig | None = None) -> Iterator[BisectState]:
    """Yield the cluster list after every bisection, starting with the single root cluster.

    Children replace their parent by being appended (left then right) after
    the parent is removed, so list order is creation order.
    """
    _check_k(dataset, k)
    state = BisectState([_cluster(dataset, dataset.all_rows())])
    yield state
    while state.j < k:
        pos = select_cluster(state.clusters)
        parent = state.clusters[pos]
        split = two_modes_bisect(dataset, parent.rows, config)
        children = [_cluster(dataset, split.left, split.left_center),
                    _cluster(dataset, split.right, split.right_center)]
        rest = state.clusters[:pos] + state.clusters[pos + 1:]
        state = BisectState(rest + children, split_position=pos, split=parent)
        yield state


def bkmodes_init(dataset: CategoricalDataset, k: int,
                 config: EngineConfig | None = None) -> np.ndarray:
    state = None
    for state in bisecting_states(dataset, k, config):
        pass
    return state.centers()


def initial_centers(dataset: CategoricalDataset, method: InitMethod | str, k: int,
                    config: EngineConfig | None = None, seed: int | None = None) -> np.ndarray:
    if isinstance(method, str):
        method = InitMethod(method, seed)
    if method.kind == "random":
        return random_init(dataset, k, method.seed)
    if method.kind == "farthest":
        return farthest_point_init(dataset, k)
    if method.kind == "cao":
        return cao_init(dataset, k)
    return bkmodes_init(dataset, k, config)
