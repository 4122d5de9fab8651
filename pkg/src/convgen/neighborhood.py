"""Exact Euclidean nearest-neighbor queries for the minority class.

Rankings sort by (distance, sample index) so results are deterministic on
every platform. Sizes here are small (a few thousand rows), so plain
brute-force distance matrices are both fast enough and exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError, Dataset


@dataclass(frozen=True)
class NeighborhoodIndex:
    """For each minority point: its `neb` nearest minority indices (self first)."""

    neb: int
    minority_indices: np.ndarray          # (n_min,) dataset row ids
    neighbors: np.ndarray                 # (n_min, neb) positions into minority_indices
    metric: str = "euclidean"


def _ranked_neighbors(queries: np.ndarray, pool: np.ndarray, k: int) -> np.ndarray:
    """(n_queries, k) positions of the k nearest pool rows, ties by index."""
    d2 = ((queries[:, None, :] - pool[None, :, :]) ** 2).sum(axis=2)
    # lexsort on (index, distance): distance is the primary key
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def knn_minority(dataset: Dataset, neb: int) -> NeighborhoodIndex:
    """Neighborhood lists of size min(neb, |minority|) inside the minority class."""
    minority = dataset.minority_indices
    if neb < 2 and len(minority) >= 2:
        raise DataError("neb must be >= 2")
    k = min(neb, len(minority))
    points = dataset.features[minority]
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    # each point is its own nearest neighbor, even among duplicate rows
    np.fill_diagonal(d2, -1.0)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return NeighborhoodIndex(neb=k, minority_indices=minority, neighbors=neighbors)


def proximal_majority(dataset: Dataset, neb: int) -> np.ndarray:
    """Union over minority points of their `neb` nearest majority indices.

    Returns sorted dataset row ids of the proximal majority set.
    """
    minority = dataset.features[dataset.minority_indices]
    majority_ids = dataset.majority_indices
    k = min(neb, len(majority_ids))
    near = _ranked_neighbors(minority, dataset.features[majority_ids], k)
    return np.unique(majority_ids[near.reshape(-1)])


def majority_neighborhoods(dataset: Dataset, neb: int) -> np.ndarray:
    """(n_min, k) majority row ids nearest to each minority point."""
    minority = dataset.features[dataset.minority_indices]
    majority_ids = dataset.majority_indices
    k = min(neb, len(majority_ids))
    near = _ranked_neighbors(minority, dataset.features[majority_ids], k)
    return majority_ids[near]
