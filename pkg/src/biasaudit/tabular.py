"""Column-oriented in-memory tables: loading, typing, and preprocessing.

A :class:`Table` is immutable after construction; every operation returns a
new table. Cells are ``str`` (categorical), ``float`` (numerical), or ``None``
(missing).
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    AllRowsDroppedError,
    ConstantColumnError,
    DuplicateHeaderError,
    EmptyFileError,
    NonNumericalTargetError,
    RaggedRowError,
    UnknownColumnError,
)

DEFAULT_NA_TOKENS = frozenset({"", "NA", "N/A", "?", "null"})

# Numeric-parse fraction above which a column is considered numerical,
# unless it looks like an integer code with few distinct values.
NUMERIC_PARSE_THRESHOLD = 0.95
INTEGER_CODE_MAX_DISTINCT = 10


class Kind(str, Enum):
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"


class CleaningMode(str, Enum):
    DROP_ROW = "drop_row"
    FILL_MODE = "fill_mode"
    FILL_MEDIAN = "fill_median"


@dataclass(frozen=True)
class CleaningPolicy:
    mode: CleaningMode = CleaningMode.DROP_ROW
    invalid_tokens: frozenset = DEFAULT_NA_TOKENS


@dataclass(frozen=True)
class Column:
    name: str
    kind: Kind
    values: tuple

    def non_missing(self) -> list:
        return [v for v in self.values if v is not None]

    def missing_count(self) -> int:
        return sum(1 for v in self.values if v is None)


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DuplicateHeaderError(f"duplicate column names in {names}")
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) > 1:
            raise RaggedRowError(f"columns have unequal lengths: {sorted(lengths)}")

    @property
    def row_count(self) -> int:
        if not self.columns:
            return 0
        return len(self.columns[0].values)

    @property
    def column_names(self) -> list:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise UnknownColumnError(f"unknown column {name!r}; have {self.column_names}")


@dataclass(frozen=True)
class CleaningResult:
    table: Table
    cells_changed: int
    rows_dropped: int


def _try_parse_float(token: str):
    try:
        v = float(token)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def infer_kind(values: Sequence, na_tokens: Iterable[str] = DEFAULT_NA_TOKENS) -> Kind:
    """Decide whether a raw cell sequence is numerical or categorical.

    Numerical iff >= 95% of non-missing cells parse as finite reals and the
    parsed values are not a small integer code (<= 10 distinct all-integer
    values), so demographic codes like ``sex in {0, 1}`` stay categorical.
    """
    na = set(na_tokens)
    present = [v for v in values if v is not None and str(v).strip() not in na]
    if not present:
        return Kind.CATEGORICAL
    parsed = [_try_parse_float(str(v).strip()) for v in present]
    numeric = [p for p in parsed if p is not None]
    if len(numeric) / len(present) < NUMERIC_PARSE_THRESHOLD:
        return Kind.CATEGORICAL
    distinct = set(numeric)
    all_integer = all(float(v).is_integer() for v in distinct)
    if all_integer and len(distinct) <= INTEGER_CODE_MAX_DISTINCT:
        return Kind.CATEGORICAL
    return Kind.NUMERICAL


def list_features(path, delimiter: str = ",") -> list:
    """Return the header names of a delimited file, in file order."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError(f"{path}: no header row") from None
    if not header or all(h.strip() == "" for h in header):
        raise EmptyFileError(f"{path}: empty header row")
    if len(set(header)) != len(header):
        raise DuplicateHeaderError(f"{path}: duplicate header names {header}")
    return header


def load_table(path, delimiter: str = ",",
               na_tokens: Iterable[str] = DEFAULT_NA_TOKENS,
               name: str | None = None) -> Table:
    """Load a delimited text file into a typed :class:`Table`.

    Column kinds are inferred with :func:`infer_kind`; cells of a numerical
    column that do not parse are marked missing, as are na tokens anywhere.
    """
    header = list_features(path, delimiter=delimiter)
    na = set(na_tokens)
    raw_cols = [[] for _ in header]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        next(reader)  # header
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise RaggedRowError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}",
                    row=rownum)
            for col, cell in zip(raw_cols, row):
                col.append(cell)
    columns = []
    for cname, raw in zip(header, raw_cols):
        columns.append(_build_column(cname, raw, na))
    return Table(name=name or str(path), columns=tuple(columns))


def _build_column(name: str, raw: list, na: set) -> Column:
    kind = infer_kind(raw, na)
    if kind is Kind.NUMERICAL:
        values = tuple(
            None if str(v).strip() in na else _try_parse_float(str(v).strip())
            for v in raw)
    else:
        values = tuple(None if str(v).strip() in na else str(v) for v in raw)
    return Column(name=name, kind=kind, values=values)


def from_columns(name: str, cols: Sequence[tuple], meta: dict | None = None) -> Table:
    """Build a table from ``(name, kind, values)`` triples."""
    columns = tuple(Column(n, Kind(k), tuple(v)) for n, k, v in cols)
    return Table(name=name, columns=columns, meta=dict(meta or {}))


def save_table(table: Table, path, delimiter: str = ",") -> None:
    """Serialize a table back to delimited text (missing cells as empty)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_table(table, delimiter=delimiter))


def serialize_table(table: Table, delimiter: str = ",") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(table.column_names)
    for i in range(table.row_count):
        writer.writerow([_format_cell(c.values[i]) for c in table.columns])
    return buf.getvalue()


def _format_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if not v.is_integer() else str(int(v))
    return str(v)


def extract_columns(table: Table, names: Sequence[str]) -> Table:
    """Project the table onto 1 or 2 named columns, preserving order and kinds."""
    cols = tuple(table.column(n) for n in names)
    return Table(name=table.name, columns=cols, meta=dict(table.meta))


def clean_missing(table: Table, columns: Sequence[str],
                  policy: CleaningPolicy = CleaningPolicy()) -> CleaningResult:
    """Remove or fill missing values in the named columns."""
    targets = [table.column(n) for n in columns]
    if policy.mode is CleaningMode.DROP_ROW:
        keep = [i for i in range(table.row_count)
                if all(c.values[i] is not None for c in targets)]
        if table.row_count > 0 and not keep:
            raise AllRowsDroppedError(
                f"cleaning {list(columns)} with drop_row removed every row")
        new_cols = tuple(
            replace(c, values=tuple(c.values[i] for i in keep))
            for c in table.columns)
        dropped = table.row_count - len(keep)
        return CleaningResult(
            Table(table.name, new_cols, dict(table.meta)), 0, dropped)

    changed = 0
    new_cols = []
    target_names = set(columns)
    for c in table.columns:
        if c.name not in target_names:
            new_cols.append(c)
            continue
        present = c.non_missing()
        if not present:
            raise AllRowsDroppedError(f"column {c.name!r} has no non-missing values")
        if policy.mode is CleaningMode.FILL_MEDIAN:
            if c.kind is not Kind.NUMERICAL:
                raise NonNumericalTargetError(
                    f"fill_median requires a numerical column, got {c.name!r}")
            fill = statistics.median(present)
        else:  # FILL_MODE
            counts = {}
            for v in present:
                counts[v] = counts.get(v, 0) + 1
            fill = sorted(counts.items(), key=lambda kv: (-kv[1], str(kv[0])))[0][0]
        filled = tuple(fill if v is None else v for v in c.values)
        changed += c.missing_count()
        new_cols.append(replace(c, values=filled))
    return CleaningResult(Table(table.name, tuple(new_cols), dict(table.meta)),
                          changed, 0)


class NormalizeMode(str, Enum):
    NORMALIZE = "normalize"
    STANDARDIZE = "standardize"


def normalize_or_standardize(table: Table, column: str,
                             mode: NormalizeMode) -> Table:
    """Rescale a numerical column to [0, 1] or to zero mean / unit sd.

    Standardization uses the population standard deviation.
    """
    col = table.column(column)
    if col.kind is not Kind.NUMERICAL:
        raise NonNumericalTargetError(f"{column!r} is not numerical")
    present = col.non_missing()
    if len(set(present)) < 2:
        raise ConstantColumnError(f"{column!r} has fewer than 2 distinct values")
    if mode is NormalizeMode.NORMALIZE:
        lo, hi = min(present), max(present)
        scale = hi - lo
        if scale == 0:
            raise ConstantColumnError(f"{column!r} is constant")
        new = tuple(None if v is None else (v - lo) / scale for v in col.values)
    else:
        mean = sum(present) / len(present)
        var = sum((v - mean) ** 2 for v in present) / len(present)
        if var == 0:
            raise ConstantColumnError(f"{column!r} has zero variance")
        sd = math.sqrt(var)
        new = tuple(None if v is None else (v - mean) / sd for v in col.values)
    new_cols = tuple(replace(c, values=new) if c.name == column else c
                     for c in table.columns)
    return Table(table.name, new_cols, dict(table.meta))


class AggregateFn(str, Enum):
    MEAN = "mean"
    COUNT = "count"
    SUM = "sum"
    MEDIAN = "median"


def group_and_aggregate(table: Table, by: str, target: str,
                        fn: AggregateFn) -> Table:
    """Aggregate ``target`` per group of ``by``; groups in ascending order."""
    by_col = table.column(by)
    target_col = table.column(target)
    if fn is not AggregateFn.COUNT and target_col.kind is not Kind.NUMERICAL:
        raise NonNumericalTargetError(
            f"{fn.value} requires a numerical target, got {target!r}")
    groups = {}
    for g, v in zip(by_col.values, target_col.values):
        if g is None:
            continue
        groups.setdefault(g, []).append(v)
    keys = sorted(groups, key=str)
    out = []
    for k in keys:
        vals = [v for v in groups[k] if v is not None]
        if fn is AggregateFn.COUNT:
            out.append(float(len(groups[k])))
        elif not vals:
            out.append(None)
        elif fn is AggregateFn.MEAN:
            out.append(sum(vals) / len(vals))
        elif fn is AggregateFn.SUM:
            out.append(float(sum(vals)))
        else:
            out.append(float(statistics.median(vals)))
    return Table(
        name=f"{table.name}:{by}-{fn.value}({target})",
        columns=(
            replace(by_col, values=tuple(keys)),
            Column(name=f"{fn.value}_{target}", kind=Kind.NUMERICAL,
                   values=tuple(out)),
        ),
        meta=dict(table.meta))
