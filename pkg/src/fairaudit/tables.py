"""Empirical joint distributions: contingency tables, with optional stratification.

Probabilities are plain double-precision ratios; cell sums used for
validation run in fixed row-major order so results are reproducible
bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, stratify
from .errors import AllStrataDropped, EmptyTable, SameVariable

DEFAULT_MIN_COUNT = 5


@dataclass(frozen=True)
class ContingencyTable:
    """Non-negative integer counts over the cross-product of two categorical variables."""

    counts: np.ndarray  # (row_arity, col_arity) int64

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2:
            raise ValueError("counts must be a 2-d array")
        if (c < 0).any():
            raise ValueError("counts must be non-negative")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def row_arity(self) -> int:
        return self.counts.shape[0]

    @property
    def col_arity(self) -> int:
        return self.counts.shape[1]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class JointTable:
    """Cell probabilities summing to one, possibly Laplace-smoothed."""

    probs: np.ndarray  # (row_arity, col_arity) float64
    smoothing_alpha: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 2 or (p < 0).any():
            raise ValueError("probs must be a non-negative 2-d array")
        total = 0.0
        for v in p.ravel(order="C"):
            total += v
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"cell probabilities sum to {total!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def row_arity(self) -> int:
        return self.probs.shape[0]

    @property
    def col_arity(self) -> int:
        return self.probs.shape[1]


@dataclass(frozen=True)
class StratifiedTables:
    """Per-stratum contingency tables with weights summing (with dropped mass) to one."""

    entries: tuple[tuple[tuple[int, ...], ContingencyTable, float], ...]
    dropped_mass: float
    min_count: int

    def __post_init__(self):
        total = self.dropped_mass
        for _, table, weight in self.entries:
            if table.total < self.min_count:
                raise ValueError("retained stratum below min_count")
            total += weight
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights + dropped_mass sum to {total!r}, not 1")


def contingency(dataset: Dataset, row_var: str, col_var: str) -> ContingencyTable:
    """Cross-tabulate two categorical columns of the dataset."""
    if row_var == col_var:
        raise SameVariable(f"row and column variable are both {row_var!r}")
    row = dataset.column(row_var)
    col = dataset.column(col_var)
    if row is col:
        raise SameVariable(f"{row_var!r} and {col_var!r} resolve to the same column")
    r, c = row.arity, col.arity
    flat = np.bincount(row.codes * c + col.codes, minlength=r * c)
    return ContingencyTable(flat.reshape(r, c))


def normalize(table: ContingencyTable, alpha: float = 0.0) -> JointTable:
    """Empirical cell probabilities with optional Laplace smoothing.

    p(i,j) = (count(i,j) + alpha) / (total + alpha * cells)
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    cells = table.row_arity * table.col_arity
    denom = table.total + alpha * cells
    if denom <= 0:
        raise EmptyTable("table is empty and alpha is 0")
    probs = (table.counts + alpha) / denom
    return JointTable(probs, smoothing_alpha=alpha)


def stratified_contingency(
    dataset: Dataset,
    row_var: str,
    col_var: str,
    condition_columns,
    min_count: int = DEFAULT_MIN_COUNT,
) -> StratifiedTables:
    """Per-stratum cross-tabulation of (row_var, col_var) given exact condition values.

    Strata smaller than min_count are dropped; their record fraction is
    reported as dropped_mass.  Raises AllStrataDropped when nothing remains,
    which signals that exact conditioning cannot be supported by the data.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if row_var == col_var:
        raise SameVariable(f"row and column variable are both {row_var!r}")
    row = dataset.column(row_var)
    col = dataset.column(col_var)
    r, c = row.arity, col.arity
    strata = stratify(dataset, condition_columns)

    n = dataset.n
    entries = []
    dropped = 0
    for key, idx in strata.items():
        if idx.size < min_count:
            dropped += idx.size
            continue
        flat = np.bincount(row.codes[idx] * c + col.codes[idx], minlength=r * c)
        table = ContingencyTable(flat.reshape(r, c))
        entries.append((key, table, idx.size / n))
    if not entries:
        raise AllStrataDropped(
            f"no stratum reaches min_count={min_count}; use soft conditioning"
        )
    return StratifiedTables(tuple(entries), dropped_mass=dropped / n, min_count=min_count)


def marginal_table(strata: StratifiedTables) -> ContingencyTable:
    """Count-wise sum of all retained strata (equals the unconditioned table when min_count=1)."""
    acc = None
    for _, table, _ in strata.entries:
        acc = table.counts.copy() if acc is None else acc + table.counts
    return ContingencyTable(acc)
