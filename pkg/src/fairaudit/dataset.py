"""Tabular dataset loading, validation, and exact stratification.

A dataset is a fixed-length collection of records with one sensitive column,
one observed target, one prediction, optional score, and a mixed list of
categorical / numeric feature columns.  Categorical columns are stored as
integer codes into a sorted category table, so two loads of the same data
always agree on the encoding.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyData,
    MissingColumn,
    NumericConditioning,
    ParseError,
    RoleViolation,
)

ROLES = ("sensitive", "target", "prediction", "feature", "score", "ignore")
KINDS = ("categorical", "numeric")

# roles that are stored as a single well-known column
_UNIQUE_ROLES = ("sensitive", "target", "prediction")


@dataclass(frozen=True)
class ColumnSchema:
    """Declared name, role and kind of one CSV column."""

    name: str
    role: str
    kind: str
    positive_label: str | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise RoleViolation(f"unknown role {self.role!r} for column {self.name!r}")
        if self.kind not in KINDS:
            raise RoleViolation(f"unknown kind {self.kind!r} for column {self.name!r}")


@dataclass(frozen=True)
class Column:
    """One loaded column: categorical (codes + category table) or numeric."""

    name: str
    kind: str
    codes: np.ndarray | None = None        # int64, categorical only
    categories: tuple[str, ...] | None = None
    values: np.ndarray | None = None       # float64, numeric only
    positive_label: str | None = None

    @property
    def arity(self) -> int:
        if self.kind != "categorical":
            raise NumericConditioning(f"column {self.name!r} is numeric")
        return len(self.categories)

    def __len__(self) -> int:
        data = self.codes if self.kind == "categorical" else self.values
        return len(data)

    def equals(self, other: "Column") -> bool:
        if (self.name, self.kind, self.categories) != (other.name, other.kind, other.categories):
            return False
        if self.kind == "categorical":
            return np.array_equal(self.codes, other.codes)
        return np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class Provenance:
    source: str
    missing: str
    threshold: float | None
    dropped_rows: int


@dataclass(frozen=True)
class Dataset:
    """Immutable, validated audit dataset."""

    s: Column
    y: Column
    y_hat: Column
    features: tuple[Column, ...]
    score: Column | None
    provenance: Provenance

    @property
    def n(self) -> int:
        return len(self.s)

    def column(self, ref: str) -> Column:
        """Resolve a role name ('sensitive'/'target'/'prediction'/'score') or feature name."""
        if ref == "sensitive":
            return self.s
        if ref == "target":
            return self.y
        if ref == "prediction":
            return self.y_hat
        if ref == "score":
            if self.score is None:
                raise MissingColumn("dataset has no score column")
            return self.score
        for col in self.features:
            if col.name == ref:
                return col
        raise MissingColumn(f"no feature column named {ref!r}")

    def feature_names(self) -> list[str]:
        return [c.name for c in self.features]

    def has_numeric_features(self) -> bool:
        return any(c.kind == "numeric" for c in self.features)

    def equals(self, other: "Dataset") -> bool:
        if self.n != other.n:
            return False
        mine = [self.s, self.y, self.y_hat] + list(self.features)
        theirs = [other.s, other.y, other.y_hat] + list(other.features)
        if len(mine) != len(theirs):
            return False
        if (self.score is None) != (other.score is None):
            return False
        if self.score is not None:
            mine.append(self.score)
            theirs.append(other.score)
        return all(a.equals(b) for a, b in zip(mine, theirs))


def load_schema_config(source) -> tuple[list[ColumnSchema], float | None, str]:
    """Parse a JSON config with keys `columns`, optional `threshold`, `missing`.

    Each entry of `columns` is {name, role, kind, positive_label?}.
    Returns (schema list, threshold, missing mode).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    elif isinstance(source, dict):
        cfg = source
    else:
        cfg = json.load(source)
    if "columns" not in cfg or not cfg["columns"]:
        raise RoleViolation("config must declare a non-empty 'columns' list")
    schema = [
        ColumnSchema(
            name=c["name"],
            role=c["role"],
            kind=c["kind"],
            positive_label=c.get("positive_label"),
        )
        for c in cfg["columns"]
    ]
    threshold = cfg.get("threshold")
    missing = cfg.get("missing", "error")
    if missing not in ("error", "drop"):
        raise RoleViolation(f"missing mode must be 'error' or 'drop', got {missing!r}")
    return schema, threshold, missing


def _validate_schema(schema: Sequence[ColumnSchema], threshold: float | None) -> None:
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise RoleViolation("duplicate column names in schema")
    for role in _UNIQUE_ROLES:
        holders = [c for c in schema if c.role == role]
        if len(holders) != 1:
            raise RoleViolation(f"exactly one column must have role {role!r}, found {len(holders)}")
    for c in schema:
        if c.role in ("sensitive", "target") and c.kind != "categorical":
            raise RoleViolation(f"{c.role} column {c.name!r} must be categorical")
        if c.role == "prediction" and c.kind == "numeric" and threshold is None:
            raise RoleViolation(
                f"numeric prediction column {c.name!r} needs a threshold to binarize"
            )


def _as_text_stream(source):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), str(source), True
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8")), "<bytes>", False
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data), getattr(source, "name", "<stream>"), False
    raise TypeError(f"unsupported CSV source {type(source)!r}")


def _encode_categorical(tokens: list[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    categories = tuple(sorted(set(tokens)))
    lookup = {cat: i for i, cat in enumerate(categories)}
    codes = np.fromiter((lookup[t] for t in tokens), dtype=np.int64, count=len(tokens))
    return codes, categories


def _parse_numeric(tokens: list[str], name: str, lines: list[int]) -> np.ndarray:
    values = np.empty(len(tokens), dtype=np.float64)
    for i, tok in enumerate(tokens):
        try:
            values[i] = float(tok)
        except ValueError:
            raise ParseError(f"non-numeric token {tok!r}", line=lines[i], column=name) from None
    return values


def _binarize(values: np.ndarray, threshold: float) -> tuple[np.ndarray, tuple[str, str]]:
    codes = (values >= threshold).astype(np.int64)
    return codes, ("0", "1")


def load_dataset(
    source,
    schema: Sequence[ColumnSchema],
    *,
    threshold: float | None = None,
    missing: str = "error",
) -> Dataset:
    """Load and validate a CSV (path, bytes, or file object) against a schema.

    Missing cells (empty fields) either raise with line/column context
    (missing='error', the default) or drop the whole row (missing='drop');
    dropped rows are counted in provenance.  Numeric prediction and score
    columns are binarized as (value >= threshold) when a threshold is given.
    """
    _validate_schema(schema, threshold)
    stream, source_name, close = _as_text_stream(source)
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyData("CSV has no header row") from None
        positions: dict[str, int] = {}
        for col in schema:
            if col.name not in header:
                raise MissingColumn(f"column {col.name!r} not in CSV header")
            positions[col.name] = header.index(col.name)

        used = [c for c in schema if c.role != "ignore"]
        raw: dict[str, list[str]] = {c.name: [] for c in used}
        lines: list[int] = []  # CSV line number per kept row (header is line 1)
        dropped = 0
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"row has {len(row)} fields, header has {len(header)}", line=line_no
                )
            cells = {c.name: row[positions[c.name]] for c in used}
            blanks = [name for name, cell in cells.items() if cell == ""]
            if blanks:
                if missing == "drop":
                    dropped += 1
                    continue
                raise ParseError("missing value", line=line_no, column=blanks[0])
            for name, cell in cells.items():
                raw[name].append(cell)
            lines.append(line_no)
        if not lines:
            raise EmptyData("CSV has no data rows" + (" after drops" if dropped else ""))
    finally:
        if close:
            stream.close()

    columns: dict[str, Column] = {}
    for c in used:
        tokens = raw[c.name]
        if c.kind == "categorical":
            codes, cats = _encode_categorical(tokens)
            col = Column(c.name, "categorical", codes=codes, categories=cats,
                         positive_label=c.positive_label)
        else:
            values = _parse_numeric(tokens, c.name, lines)
            if c.role == "prediction" or (c.role == "score" and threshold is not None):
                codes, cats = _binarize(values, threshold)
                col = Column(c.name, "categorical", codes=codes, categories=cats,
                             positive_label=c.positive_label)
            else:
                col = Column(c.name, "numeric", values=values,
                             positive_label=c.positive_label)
        columns[c.name] = col

    by_role = {c.role: columns[c.name] for c in used if c.role in _UNIQUE_ROLES}
    score = next((columns[c.name] for c in used if c.role == "score"), None)
    features = tuple(columns[c.name] for c in used if c.role == "feature")

    if by_role["sensitive"].arity < 2:
        raise RoleViolation("sensitive column must have at least 2 categories")

    for col in columns.values():
        arr = col.codes if col.kind == "categorical" else col.values
        arr.flags.writeable = False

    return Dataset(
        s=by_role["sensitive"],
        y=by_role["target"],
        y_hat=by_role["prediction"],
        features=features,
        score=score,
        provenance=Provenance(source_name, missing, threshold, dropped),
    )


def save_csv(dataset: Dataset, target) -> None:
    """Write the dataset back to CSV; reloading with the same schema round-trips."""
    if isinstance(target, (str, Path)):
        fh = open(target, "w", encoding="utf-8", newline="")
        close = True
    else:
        fh = target
        close = False
    try:
        writer = csv.writer(fh)
        cols = [dataset.s, dataset.y, dataset.y_hat]
        if dataset.score is not None:
            cols.append(dataset.score)
        cols.extend(dataset.features)
        writer.writerow([c.name for c in cols])
        for i in range(dataset.n):
            row = []
            for c in cols:
                if c.kind == "categorical":
                    row.append(c.categories[c.codes[i]])
                else:
                    row.append(repr(float(c.values[i])))
            writer.writerow(row)
    finally:
        if close:
            fh.close()


def stratify(dataset: Dataset, condition_columns: Iterable[str]) -> dict[tuple[int, ...], np.ndarray]:
    """Partition record indices by exact value combination of the given columns.

    Keys are tuples of category codes, iterated in lexicographic order.
    An empty condition set yields the single stratum () holding all records.
    """
    refs = list(condition_columns)
    if not refs:
        return {(): np.arange(dataset.n, dtype=np.int64)}
    cols = [dataset.column(r) for r in refs]
    for r, c in zip(refs, cols):
        if c.kind != "categorical":
            raise NumericConditioning(f"cannot stratify on numeric column {r!r}")
    matrix = np.stack([c.codes for c in cols], axis=1)
    keys, inverse = np.unique(matrix, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.cumsum(np.bincount(inverse, minlength=len(keys)))[:-1]
    groups = np.split(order, bounds)
    return {tuple(int(v) for v in key): idx for key, idx in zip(keys, groups)}
