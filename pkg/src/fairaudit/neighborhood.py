"""Soft conditioning via feature-space neighborhoods.

Exact stratification compares records with identical feature vectors; for
continuous or high-cardinality features that leaves every stratum nearly
empty.  Here each record is instead compared against its neighborhood
(k nearest or all records within a distance ball), the local dependence
between the outcome and the sensitive attribute is measured inside the
neighborhood, and the audit passes when the fraction of non-violating
records is high enough.

Queries are exact.  For pure-numeric features a KD-tree prunes candidates
(L1 metric on weighted scaled coordinates equals the record distance), but
final membership is always decided by the canonical distance kernel, so
tree-backed and linear-scan results are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .criteria import CriterionSpec
from .dataset import Dataset
from .distance import DistanceSpec, FeatureSpace
from .errors import AllIndeterminate, GroupCriterion, InvalidParams
from .measures import mi_nats

DEFAULT_EPSILON = 0.05
DEFAULT_DELTA = 0.05
DEFAULT_MIN_NEIGHBORHOOD = 10

_TREE_MIN_RECORDS = 1024     # below this a linear scan wins
_TREE_SLACK = 1e-9           # relative candidate-radius inflation over the pruning metric


@dataclass(frozen=True)
class NeighborhoodSpec:
    """knn(k) or ball(radius in (0, 1]); include_self keeps the record itself."""

    mode: str                  # 'knn' or 'ball'
    k: int | None = None
    radius: float | None = None
    include_self: bool = True

    def __post_init__(self):
        if self.mode == "knn":
            if self.k is None or self.k < 1:
                raise InvalidParams("knn mode needs k >= 1")
        elif self.mode == "ball":
            if self.radius is None or not (0.0 < self.radius <= 1.0):
                raise InvalidParams("ball mode needs radius in (0, 1]")
        else:
            raise InvalidParams(f"unknown neighborhood mode {self.mode!r}")


class NeighborIndex:
    """Immutable exact neighbor queries over a dataset's feature space."""

    def __init__(self, dataset: Dataset, dist: DistanceSpec | None = None):
        self.space = FeatureSpace(dataset, dist)
        self.n = self.space.n
        self._tree = None
        if self.space.pure_numeric and self.n >= _TREE_MIN_RECORDS:
            self._coords = self.space.tree_coordinates()
            self._tree = cKDTree(self._coords)

    # -- single-record queries -------------------------------------------

    def knn(self, i: int, k: int, include_self: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """k nearest records to record i, ordered by (distance, record index)."""
        members, dists = self._knn_block(np.array([i]), k, include_self)
        return members[0], dists[0]

    def ball(self, i: int, radius: float, include_self: bool = True) -> np.ndarray:
        """All records within `radius` of record i, in ascending index order."""
        return self._ball_block(np.array([i]), radius, include_self)[0]

    # -- batched queries ----------------------------------------------------

    def _chunk(self) -> int:
        return max(16, int(2e7) // max(self.n, 1))

    def _knn_block(self, queries: np.ndarray, k: int, include_self: bool):
        if not (1 <= k <= self.n - (0 if include_self else 1)):
            raise InvalidParams(f"k={k} out of range for n={self.n}")
        members = np.empty((len(queries), k), dtype=np.int64)
        dists = np.empty((len(queries), k))
        if self._tree is not None:
            self._knn_tree(queries, k, include_self, members, dists)
        else:
            self._knn_linear(queries, k, include_self, members, dists)
        return members, dists

    def _knn_linear(self, queries, k, include_self, members, dists):
        step = self._chunk()
        for lo in range(0, len(queries), step):
            q = queries[lo:lo + step]
            d = self.space.block_distances(q)
            if not include_self:
                d[np.arange(len(q)), q] = np.inf
            for row, qi in enumerate(q):
                order = np.lexsort((np.arange(self.n), d[row]))[:k]
                members[lo + row] = order
                dists[lo + row] = d[row][order]

    def _knn_tree(self, queries, k, include_self, members, dists):
        kq = k if include_self else k + 1
        tree_d, _ = self._tree.query(self._coords[queries], k=kq, p=1.0, workers=1)
        tree_d = np.asarray(tree_d).reshape(len(queries), kq)
        radius = tree_d[:, -1] * (1.0 + _TREE_SLACK) + 1e-12
        cands = self._tree.query_ball_point(self._coords[queries], radius, p=1.0, workers=1)
        for row, qi in enumerate(queries):
            cand = np.asarray(cands[row], dtype=np.int64)
            if not include_self:
                cand = cand[cand != qi]
            d = self.space.pair_distances(np.full(cand.shape, qi), cand)
            order = np.lexsort((cand, d))[:k]
            members[row] = cand[order]
            dists[row] = d[order]

    def _ball_block(self, queries: np.ndarray, radius: float, include_self: bool):
        if radius <= 0:
            raise InvalidParams("radius must be positive")
        out = []
        if self._tree is not None:
            cands = self._tree.query_ball_point(
                self._coords[queries], radius * (1.0 + _TREE_SLACK) + 1e-12, p=1.0, workers=1
            )
            for row, qi in enumerate(queries):
                cand = np.sort(np.asarray(cands[row], dtype=np.int64))
                d = self.space.pair_distances(np.full(cand.shape, qi), cand)
                keep = cand[d <= radius]
                if not include_self:
                    keep = keep[keep != qi]
                out.append(keep)
        else:
            step = self._chunk()
            for lo in range(0, len(queries), step):
                q = queries[lo:lo + step]
                d = self.space.block_distances(q)
                for row, qi in enumerate(q):
                    keep = np.nonzero(d[row] <= radius)[0]
                    if not include_self:
                        keep = keep[keep != qi]
                    out.append(keep.astype(np.int64))
        return out


def build_index(dataset: Dataset, dist: DistanceSpec | None = None) -> NeighborIndex:
    """Build an immutable exact neighbor index over the dataset's features."""
    return NeighborIndex(dataset, dist)


@dataclass
class SoftResult:
    """Per-record soft audit of a feature-conditioned criterion."""

    criterion: CriterionSpec
    measure_kind: str            # 'mi' (local nats) or 'rate' (largest rate spread)
    epsilon: float               # local violation threshold
    delta: float                 # allowed violating fraction
    neighborhood: NeighborhoodSpec
    neighborhood_sizes: np.ndarray   # after conditioning-variable restriction
    local_values: np.ndarray         # nan where indeterminate
    violated: np.ndarray             # bool, always False where indeterminate
    indeterminate: np.ndarray        # bool
    satisfied_fraction: float        # non-violating / determinate
    indeterminate_fraction: float
    passed: bool
    min_neighborhood: int

    @property
    def flagged_indices(self) -> np.ndarray:
        return np.nonzero(self.violated)[0]

    def per_instance(self):
        """Iterate (record index, neighborhood size, local value, violated) tuples."""
        for i in range(len(self.local_values)):
            yield (i, int(self.neighborhood_sizes[i]),
                   float(self.local_values[i]), bool(self.violated[i]))


def _local_rate_gap(counts: np.ndarray) -> np.ndarray:
    """Batched largest spread of P(left = v | group) across groups with members."""
    group_tot = counts.sum(axis=1, keepdims=True)            # (m, 1, C)
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = counts / group_tot
    present = group_tot[:, 0, :] > 0                          # (m, C)
    hi = np.where(present[:, None, :], rates, -np.inf).max(axis=2)
    lo = np.where(present[:, None, :], rates, np.inf).min(axis=2)
    gap = (hi - lo).max(axis=1)
    enough_groups = present.sum(axis=1) >= 2
    return np.where(enough_groups, gap, 0.0)


def soft_evaluate(
    dataset: Dataset,
    spec: CriterionSpec,
    nspec: NeighborhoodSpec,
    dist: DistanceSpec | None = None,
    measure_kind: str = "mi",
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    min_neighborhood: int = DEFAULT_MIN_NEIGHBORHOOD,
    index: NeighborIndex | None = None,
) -> SoftResult:
    """Audit a feature-conditioned criterion record by record.

    For every record: take its neighborhood, keep only members that share
    the record's own value of the non-feature conditioning variables (the
    observed target for individual equalized odds, the prediction for
    individual sufficiency), measure the local dependence between the
    criterion's outcome variable and the sensitive attribute over those
    members, and flag a violation when it exceeds epsilon.  Records whose
    restricted neighborhood is smaller than min_neighborhood are
    indeterminate: they are reported but excluded from the satisfied
    fraction's denominator.  The audit passes when
    satisfied_fraction >= 1 - delta.
    """
    if "features" not in spec.given:
        raise GroupCriterion(f"criterion {spec.id!r} does not condition on features")
    if epsilon <= 0:
        raise InvalidParams("epsilon must be positive")
    if not (0.0 <= delta < 1.0):
        raise InvalidParams("delta must be in [0, 1)")
    if min_neighborhood < 1:
        raise InvalidParams("min_neighborhood must be >= 1")
    if measure_kind not in ("mi", "rate"):
        raise InvalidParams("soft measure kind must be 'mi' or 'rate'")

    if index is None:
        index = build_index(dataset, dist)
    n = dataset.n
    left = dataset.column(spec.left)
    s = dataset.s
    r_arity, c_arity = left.arity, s.arity
    cells = r_arity * c_arity
    pair_code = left.codes * c_arity + s.codes

    cond_tokens = [g for g in spec.given if g != "features"]
    if cond_tokens:
        cond_code = np.zeros(n, dtype=np.int64)
        for token in cond_tokens:
            col = dataset.column(token)
            cond_code = cond_code * col.arity + col.codes
    else:
        cond_code = None

    sizes = np.zeros(n, dtype=np.int64)
    values = np.full(n, np.nan)
    step = index._chunk() if nspec.mode == "ball" else max(512, index._chunk())
    all_queries = np.arange(n, dtype=np.int64)
    for lo in range(0, n, step):
        q = all_queries[lo:lo + step]
        if nspec.mode == "knn":
            members, _ = index._knn_block(q, nspec.k, nspec.include_self)
            owners = np.repeat(q, nspec.k)
            flat = members.ravel()
        else:
            hoods = index._ball_block(q, nspec.radius, nspec.include_self)
            lens = np.fromiter((len(h) for h in hoods), dtype=np.int64, count=len(hoods))
            owners = np.repeat(q, lens)
            flat = np.concatenate(hoods) if hoods else np.empty(0, dtype=np.int64)
        if cond_code is not None:
            keep = cond_code[flat] == cond_code[owners]
            owners = owners[keep]
            flat = flat[keep]
        local = owners - lo
        m = len(q)
        counts = np.bincount(local * cells + pair_code[flat], minlength=m * cells)
        counts = counts.reshape(m, r_arity, c_arity).astype(np.float64)
        tot = counts.sum(axis=(1, 2))
        sizes[q] = tot.astype(np.int64)
        ok = tot > 0
        if measure_kind == "mi":
            with np.errstate(invalid="ignore", divide="ignore"):
                probs = counts / tot[:, None, None]
            # rows with an empty neighborhood get a placeholder uniform table;
            # their value is discarded below
            probs = np.where(ok[:, None, None], probs, 1.0 / cells)
            chunk_vals = np.where(ok, mi_nats(probs), np.nan)
        else:
            chunk_vals = np.where(ok, _local_rate_gap(counts), np.nan)
        values[q] = chunk_vals

    indeterminate = sizes < min_neighborhood
    values[indeterminate] = np.nan
    determinate_count = int((~indeterminate).sum())
    if determinate_count == 0:
        raise AllIndeterminate(
            f"every record's restricted neighborhood is below {min_neighborhood}"
        )
    violated = np.zeros(n, dtype=bool)
    det = ~indeterminate
    violated[det] = values[det] > epsilon
    satisfied = determinate_count - int(violated.sum())
    satisfied_fraction = satisfied / determinate_count
    return SoftResult(
        criterion=spec,
        measure_kind=measure_kind,
        epsilon=epsilon,
        delta=delta,
        neighborhood=nspec,
        neighborhood_sizes=sizes,
        local_values=values,
        violated=violated,
        indeterminate=indeterminate,
        satisfied_fraction=satisfied_fraction,
        indeterminate_fraction=1.0 - determinate_count / n,
        passed=satisfied_fraction >= 1.0 - delta,
        min_neighborhood=min_neighborhood,
    )
