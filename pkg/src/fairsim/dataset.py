"""Mixed-type tabular datasets: loading, schema, groups, target binarization.

Cells are either a float (numeric column), a string token (categorical
column) or ``MISSING`` (``None``). Rows are identified by zero-based index
throughout the pipeline. Datasets are treated as immutable after load: every
operation returns a new object.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ParseError, ValidationError

MISSING = None

DEFAULT_MISSING_TOKENS = ("", "NA", "NULL")

#: provenance column name used when exporting augmented datasets
ORIGIN_COLUMN = "__fairsim_origin"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str  # "numeric" | "categorical"
    sensitive: bool = False
    observed_range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise ValidationError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "numeric" and self.observed_range is not None:
            lo, hi = self.observed_range
            if lo > hi:
                raise ValidationError(f"column {self.name!r}: range min > max")


@dataclass(frozen=True)
class TabularDataset:
    columns: tuple[ColumnSchema, ...]
    rows: tuple[tuple, ...]
    target: str

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate column names")
        if self.target not in names:
            raise ValidationError(f"target column {self.target!r} not in schema")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValidationError(f"row {i}: expected {len(self.columns)} cells, got {len(row)}")
        ti = names.index(self.target)
        if any(row[ti] is MISSING for row in self.rows):
            raise ValidationError("target column contains MISSING cells")
        if len(self.rows) < 2:
            raise ValidationError("dataset needs at least 2 rows")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise ValidationError(f"unknown column {name!r}")

    def column_values(self, name: str) -> list:
        i = self.column_index(name)
        return [row[i] for row in self.rows]

    @property
    def target_values(self) -> list:
        return self.column_values(self.target)

    def feature_columns(self) -> list[ColumnSchema]:
        return [c for c in self.columns if c.name != self.target]

    def feature_rows(self) -> list[tuple]:
        ti = self.column_index(self.target)
        return [tuple(v for j, v in enumerate(row) if j != ti) for row in self.rows]

    def has_missing(self) -> bool:
        return any(cell is MISSING for row in self.rows for cell in row)

    def with_rows(self, rows: Iterable[Sequence]) -> "TabularDataset":
        """New dataset with the same schema but different rows; numeric
        observed ranges are recomputed."""
        rows = tuple(tuple(r) for r in rows)
        cols = tuple(
            replace(c, observed_range=_observed_range([row[i] for row in rows]))
            if c.kind == "numeric" else c
            for i, c in enumerate(self.columns)
        )
        return TabularDataset(columns=cols, rows=rows, target=self.target)


def _observed_range(values) -> Optional[tuple[float, float]]:
    obs = [v for v in values if v is not MISSING]
    if not obs:
        return None
    return (float(min(obs)), float(max(obs)))


def _parse_cell(token: str, kind: str, missing_tokens, row_idx: int, col: str):
    if token in missing_tokens:
        return MISSING
    if kind == "numeric":
        try:
            return float(token)
        except ValueError:
            raise ParseError(
                f"row {row_idx}, column {col!r}: cannot parse {token!r} as a number"
            ) from None
    return token


def infer_schema(header, raw_rows, missing_tokens=DEFAULT_MISSING_TOKENS) -> list[ColumnSchema]:
    """A column is numeric iff every non-missing cell parses as a number."""
    schemas = []
    for j, name in enumerate(header):
        numeric = True
        seen = False
        for row in raw_rows:
            tok = row[j]
            if tok in missing_tokens:
                continue
            seen = True
            try:
                float(tok)
            except ValueError:
                numeric = False
                break
        schemas.append(ColumnSchema(name=name, kind="numeric" if numeric and seen else "categorical"))
    return schemas


def load_dataset(path, schema=None, target=None, delimiter=",",
                 missing_tokens=DEFAULT_MISSING_TOKENS) -> TabularDataset:
    """Load a delimited text file (header row required) into a dataset.

    ``schema`` may be a list of ColumnSchema or None to infer; ``target``
    defaults to the last column. Numeric observed ranges are computed over
    non-missing values. A trailing provenance column (ORIGIN_COLUMN) written
    by augmentation export is dropped on load.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        raw_rows = list(reader)
    if not raw_rows:
        raise ParseError(f"{path}: no data rows")

    drop = None
    if ORIGIN_COLUMN in header:
        drop = header.index(ORIGIN_COLUMN)
        header = [h for i, h in enumerate(header) if i != drop]

    cleaned = []
    for i, raw in enumerate(raw_rows):
        if drop is not None and len(raw) == len(header) + 1:
            raw = [t for j, t in enumerate(raw) if j != drop]
        if len(raw) != len(header):
            raise ParseError(f"{path}: row {i} has {len(raw)} cells, expected {len(header)}")
        cleaned.append(raw)

    if schema is None:
        schema = infer_schema(header, cleaned, missing_tokens)
    else:
        by_name = {c.name: c for c in schema}
        if set(by_name) != set(header):
            raise ValidationError("schema column names do not match file header")
        schema = [by_name[h] for h in header]

    rows = []
    for i, raw in enumerate(cleaned):
        rows.append(tuple(
            _parse_cell(tok, schema[j].kind, missing_tokens, i, schema[j].name)
            for j, tok in enumerate(raw)
        ))

    cols = tuple(
        replace(c, observed_range=_observed_range([row[j] for row in rows]))
        if c.kind == "numeric" else c
        for j, c in enumerate(schema)
    )
    tgt = target if target is not None else header[-1]
    return TabularDataset(columns=cols, rows=tuple(rows), target=tgt)


def save_dataset(dataset: TabularDataset, path, delimiter=",", missing_token="NA",
                 provenance=None) -> None:
    """Write a dataset back to delimited text. ``provenance`` (one token per
    row) adds the ORIGIN_COLUMN."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        header = [c.name for c in dataset.columns]
        if provenance is not None:
            header = header + [ORIGIN_COLUMN]
        writer.writerow(header)
        for i, row in enumerate(dataset.rows):
            out = []
            for c, cell in zip(dataset.columns, row):
                if cell is MISSING:
                    out.append(missing_token)
                elif c.kind == "numeric":
                    out.append(repr(float(cell)))
                else:
                    out.append(str(cell))
            if provenance is not None:
                out.append(provenance[i])
            writer.writerow(out)


@dataclass(frozen=True)
class GroupCondition:
    column: str
    op: str  # "eq" | "le" | "ge"
    value: object

    def matches(self, cell) -> bool:
        if self.op == "eq":
            return cell == self.value
        if self.op == "le":
            return float(cell) <= float(self.value)
        if self.op == "ge":
            return float(cell) >= float(self.value)
        raise ValidationError(f"unknown group operator {self.op!r}")


@dataclass(frozen=True)
class GroupSpec:
    """Conjunction of per-column conditions; matching rows are privileged."""
    conditions: tuple[GroupCondition, ...]

    @classmethod
    def from_json(cls, obj) -> "GroupSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(GroupCondition(c["column"], c["op"], c["value"]) for c in obj))

    def to_json(self):
        return [{"column": c.column, "op": c.op, "value": c.value} for c in self.conditions]


def assign_groups(dataset: TabularDataset, spec: GroupSpec) -> np.ndarray:
    """Per-row binary group labels: 1 = privileged (predicate holds)."""
    idx = {}
    for cond in spec.conditions:
        idx[cond.column] = dataset.column_index(cond.column)
    for cond in spec.conditions:
        col = dataset.column_values(cond.column)
        if any(v is MISSING for v in col):
            raise ValidationError(f"group column {cond.column!r} has MISSING cells")
    s = np.ones(dataset.n_rows, dtype=int)
    for i, row in enumerate(dataset.rows):
        for cond in spec.conditions:
            if not cond.matches(row[idx[cond.column]]):
                s[i] = 0
                break
    if s.sum() == 0 or s.sum() == dataset.n_rows:
        warnings.warn("group predicate leaves one group empty", stacklevel=2)
    return s


@dataclass(frozen=True)
class BinaryTargetRule:
    source_column: str
    rule: str  # "median_split" | "threshold" | "categories"
    threshold: Optional[float] = None
    favorable: Optional[frozenset] = None  # category tokens mapped to 1

    @classmethod
    def median_split(cls, column):
        return cls(column, "median_split")

    @classmethod
    def explicit_threshold(cls, column, threshold):
        return cls(column, "threshold", threshold=float(threshold))

    @classmethod
    def category_partition(cls, column, favorable):
        return cls(column, "categories", favorable=frozenset(favorable))


def binarize_target(dataset: TabularDataset, rule: BinaryTargetRule) -> TabularDataset:
    """Replace the target column with {0, 1}; 1 is the favorable label.

    Median split: strictly above the median maps to 1, equal-or-below to 0.
    """
    ci = dataset.column_index(rule.source_column)
    values = [row[ci] for row in dataset.rows]
    col = dataset.columns[ci]
    if rule.rule in ("median_split", "threshold"):
        if col.kind != "numeric":
            raise ValidationError(f"rule {rule.rule!r} needs a numeric column")
        cut = float(np.median(values)) if rule.rule == "median_split" else rule.threshold
        labels = [1 if v > cut else 0 for v in values]
    elif rule.rule == "categories":
        labels = [1 if v in rule.favorable else 0 for v in values]
    else:
        raise ValidationError(f"unknown binarization rule {rule.rule!r}")
    if len(set(labels)) < 2:
        raise ValidationError("binarization yields a single class")

    cols = list(dataset.columns)
    cols[ci] = ColumnSchema(name=col.name, kind="categorical", sensitive=col.sensitive)
    rows = [
        tuple(labels[i] if j == ci else v for j, v in enumerate(row))
        for i, row in enumerate(dataset.rows)
    ]
    return TabularDataset(columns=tuple(cols), rows=tuple(rows), target=rule.source_column)
