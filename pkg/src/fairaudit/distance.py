"""Mixed-type record distance (Gower style).

Numeric columns are min-max normalized to [0, 1] and compared by absolute
difference; categorical columns contribute 0/1 mismatch.  The distance is
the weighted mean of per-column contributions, so it always lands in
[0, 1], is symmetric, and is zero exactly on identical feature vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidParams, NoFeatures


@dataclass(frozen=True)
class DistanceSpec:
    """Per-column weights for the mixed-type distance (default weight 1)."""

    weights: dict[str, float] | None = None

    def weight_for(self, name: str) -> float:
        if self.weights is None:
            return 1.0
        return float(self.weights.get(name, 1.0))


class FeatureSpace:
    """Encoded feature columns of a dataset plus the canonical distance kernel.

    Every consumer (linear scan, tree-accelerated queries, audits) funnels
    through `pair_distances` / `block_distances`, which accumulate column
    contributions in dataset feature order, so distances are bit-identical
    no matter which query strategy produced the candidate pairs.
    """

    def __init__(self, dataset: Dataset, dist: DistanceSpec | None = None):
        if not dataset.features:
            raise NoFeatures("dataset has no feature columns")
        dist = dist or DistanceSpec()
        self.n = dataset.n
        self.column_names = dataset.feature_names()
        self.weights = np.array([dist.weight_for(c.name) for c in dataset.features])
        if (self.weights < 0).any():
            raise InvalidParams("distance weights must be non-negative")
        self.total_weight = float(self.weights.sum())
        if self.total_weight <= 0:
            raise InvalidParams("at least one distance weight must be positive")

        self._kinds = [c.kind for c in dataset.features]
        self._columns = []
        for c in dataset.features:
            if c.kind == "numeric":
                lo = float(c.values.min())
                span = float(c.values.max()) - lo
                if span > 0:
                    scaled = (c.values - lo) / span
                else:
                    scaled = np.zeros(self.n)  # constant column: contributes 0
                self._columns.append(scaled)
            else:
                self._columns.append(c.codes)
        self.pure_numeric = all(k == "numeric" for k in self._kinds)

    def pair_distances(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Distances for aligned index arrays a[i] <-> b[i]."""
        acc = np.zeros(len(a))
        for kind, col, w in zip(self._kinds, self._columns, self.weights):
            if w == 0.0:
                continue
            if kind == "numeric":
                acc += w * np.abs(col[a] - col[b])
            else:
                acc += w * (col[a] != col[b])
        return acc / self.total_weight

    def block_distances(self, query_idx: np.ndarray) -> np.ndarray:
        """Distances from each query record to all records; shape (len(query_idx), n)."""
        acc = np.zeros((len(query_idx), self.n))
        for kind, col, w in zip(self._kinds, self._columns, self.weights):
            if w == 0.0:
                continue
            if kind == "numeric":
                acc += w * np.abs(col[query_idx][:, None] - col[None, :])
            else:
                acc += w * (col[query_idx][:, None] != col[None, :])
        return acc / self.total_weight

    def tree_coordinates(self) -> np.ndarray:
        """Weighted scaled coordinates in which L1 distance equals this distance.

        Only valid for pure-numeric feature sets; used to prune candidates,
        never as the final arbiter.
        """
        if not self.pure_numeric:
            raise InvalidParams("tree coordinates need all-numeric features")
        cols = [col * (w / self.total_weight)
                for col, w in zip(self._columns, self.weights) if w > 0.0]
        return np.stack(cols, axis=1)


def gower_matrix_condensed(matrix: np.ndarray, weights=None) -> np.ndarray:
    """Condensed (i < j, row-major) pairwise distances for a raw numeric matrix.

    Same normalization and weighting rules as FeatureSpace, for callers that
    work on plain arrays rather than datasets.
    """
    x = np.asarray(matrix, dtype=np.float64)
    n, p = x.shape
    w = np.ones(p) if weights is None else np.asarray(weights, dtype=np.float64)
    if (w < 0).any() or w.sum() <= 0:
        raise InvalidParams("weights must be non-negative with positive total")
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    scaled = np.where(span > 0, (x - lo) / np.where(span > 0, span, 1.0), 0.0)
    out = np.empty(n * (n - 1) // 2)
    pos = 0
    for i in range(n - 1):
        block = (np.abs(scaled[i + 1:] - scaled[i]) * w).sum(axis=1) / w.sum()
        out[pos:pos + block.size] = block
        pos += block.size
    return out
