"""Columnar in-memory tables with explicit missingness.

Numeric columns carry a ``bad_mask`` marking values that were missing,
NaN or infinite.  Categorical columns keep a level dictionary plus integer
codes; a missing entry is the distinguished code ``MISSING_CODE`` and is
treated as an ordinary level by every downstream encoder.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .exceptions import CSVFormatError, SchemaError

MISSING_CODE = -1
DEFAULT_MISSING_TOKENS = ("", "NA")

_NUMBER_RE = re.compile(
    r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$"
    r"|^[+-]?(?:inf|infinity|nan)$",
    re.IGNORECASE,
)


def parse_number(token: str) -> float | None:
    """Parse a decimal/scientific token, or return None if it is not one.

    ``Inf``, ``-Inf`` and ``NaN`` (any case) parse; callers mask them.
    Python-only spellings such as ``1_000`` or hex floats are rejected.
    """
    token = token.strip()
    if not _NUMBER_RE.match(token):
        return None
    return float(token)


@dataclass(frozen=True, eq=False)
class NumericColumn:
    values: np.ndarray
    bad_mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        bad = np.asarray(self.bad_mask, dtype=bool)
        if values.ndim != 1 or values.shape != bad.shape:
            raise ValueError("values and bad_mask must be 1-d and the same length")
        bad = bad | ~np.isfinite(values)
        values = np.where(bad, np.nan, values)
        values.setflags(write=False)
        bad.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bad_mask", bad)

    kind = "numeric"

    @classmethod
    def from_values(cls, values: Iterable) -> "NumericColumn":
        """Build from floats; None, NaN and +/-inf become bad entries."""
        vals = np.array([np.nan if v is None else float(v) for v in values],
                        dtype=np.float64)
        return cls(vals, ~np.isfinite(vals))

    def __len__(self):
        return self.values.shape[0]

    def take(self, rows) -> "NumericColumn":
        return NumericColumn(self.values[rows], self.bad_mask[rows])

    def tokens(self) -> list[str]:
        return ["NA" if b else format(v, ".17g")
                for v, b in zip(self.values.tolist(), self.bad_mask.tolist())]

    def to_list(self) -> list:
        return [None if b else v
                for v, b in zip(self.values.tolist(), self.bad_mask.tolist())]

    def equals(self, other) -> bool:
        return (isinstance(other, NumericColumn)
                and np.array_equal(self.bad_mask, other.bad_mask)
                and np.array_equal(self.values[~self.bad_mask],
                                   other.values[~other.bad_mask]))


@dataclass(frozen=True, eq=False)
class CategoricalColumn:
    """Level dictionary plus codes; ``MISSING_CODE`` marks absent values.

    ``levels`` may contain entries that no row references (e.g. after
    ``take``); encoders only count observed levels.
    """

    levels: tuple
    codes: np.ndarray

    kind = "categorical"

    def __post_init__(self):
        levels = tuple(str(v) for v in self.levels)
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 1:
            raise ValueError("codes must be 1-d")
        if len(set(levels)) != len(levels):
            raise ValueError("duplicate level in level dictionary")
        if codes.size and (codes.min() < MISSING_CODE or codes.max() >= len(levels)):
            raise ValueError("code outside level dictionary")
        codes.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_values(cls, values: Iterable) -> "CategoricalColumn":
        """Build from labels; None means missing.  Levels keep first-seen order."""
        index: dict[str, int] = {}
        codes = []
        for v in values:
            if v is None or (isinstance(v, float) and math.isnan(v)):
                codes.append(MISSING_CODE)
                continue
            key = _label(v)
            codes.append(index.setdefault(key, len(index)))
        return cls(tuple(index), np.array(codes, dtype=np.int64))

    def __len__(self):
        return self.codes.shape[0]

    @property
    def missing_mask(self) -> np.ndarray:
        return self.codes == MISSING_CODE

    def keys(self) -> list:
        """Level key per code slot: ``keys()[code + 1]``; slot 0 is missing (None)."""
        return [None, *self.levels]

    def labels(self) -> list:
        keys = self.keys()
        return [keys[c + 1] for c in self.codes.tolist()]

    def take(self, rows) -> "CategoricalColumn":
        return CategoricalColumn(self.levels, self.codes[rows])

    def tokens(self) -> list[str]:
        return ["NA" if v is None else v for v in self.labels()]

    def to_list(self) -> list:
        return self.labels()

    def equals(self, other) -> bool:
        return isinstance(other, CategoricalColumn) and self.labels() == other.labels()


Column = Union[NumericColumn, CategoricalColumn]


def _label(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "TRUE" if v else "FALSE"
    return str(v)


def as_column(values) -> Column:
    """Coerce a sequence to a column: numbers/None → numeric, otherwise categorical.

    Booleans become the categorical levels ``"TRUE"``/``"FALSE"``.
    """
    if isinstance(values, (NumericColumn, CategoricalColumn)):
        return values
    if isinstance(values, np.ndarray) and values.dtype.kind in "fiu":
        return NumericColumn.from_values(values.astype(np.float64))
    values = list(values)
    numeric = all(
        v is None or (isinstance(v, (int, float, np.integer, np.floating))
                      and not isinstance(v, (bool, np.bool_)))
        for v in values
    )
    if numeric:
        return NumericColumn.from_values(values)
    return CategoricalColumn.from_values(values)


class Frame:
    """Ordered name → column map with a common row count.  Immutable."""

    __slots__ = ("_columns", "nrows")

    def __init__(self, columns: Mapping[str, Column], nrows: int | None = None):
        cols = dict(columns)
        lengths = {len(c) for c in cols.values()}
        if nrows is None:
            if len(lengths) > 1:
                raise ValueError(f"columns have differing lengths {sorted(lengths)}")
            nrows = lengths.pop() if lengths else 0
        elif lengths - {nrows}:
            raise ValueError(f"every column must have {nrows} rows")
        for name, col in cols.items():
            if not isinstance(name, str) or not name:
                raise ValueError("column names must be nonempty strings")
            if not isinstance(col, (NumericColumn, CategoricalColumn)):
                raise TypeError(f"column {name!r} is not a NumericColumn/CategoricalColumn")
        self._columns = cols
        self.nrows = int(nrows)

    @classmethod
    def from_dict(cls, data: Mapping[str, Iterable]) -> "Frame":
        return cls({name: as_column(vals) for name, vals in data.items()})

    @property
    def columns(self) -> dict[str, Column]:
        return dict(self._columns)

    @property
    def names(self) -> list[str]:
        return list(self._columns)

    def __getitem__(self, name: str) -> Column:
        try:
            return self._columns[name]
        except KeyError:
            raise KeyError(f"no column named {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._columns

    def __len__(self):
        return self.nrows

    def __repr__(self):
        kinds = ", ".join(f"{n}:{c.kind}" for n, c in self._columns.items())
        return f"Frame(nrows={self.nrows}, columns=[{kinds}])"

    def take(self, rows) -> "Frame":
        rows = np.asarray(rows, dtype=np.int64)
        return Frame({n: c.take(rows) for n, c in self._columns.items()}, len(rows))

    def select(self, names: Sequence[str]) -> "Frame":
        return Frame({n: self[n] for n in names}, self.nrows)

    def schema(self) -> "Schema":
        return Schema({n: c.kind for n, c in self._columns.items()})

    def to_dict(self) -> dict[str, list]:
        return {n: c.to_list() for n, c in self._columns.items()}

    def to_numpy(self, names: Sequence[str] | None = None) -> np.ndarray:
        """Stack numeric columns into a float matrix (bad entries as NaN)."""
        names = self.names if names is None else list(names)
        out = np.empty((self.nrows, len(names)))
        for j, n in enumerate(names):
            col = self[n]
            if not isinstance(col, NumericColumn):
                raise TypeError(f"column {n!r} is categorical")
            out[:, j] = col.values
        return out

    def equals(self, other: "Frame") -> bool:
        return (isinstance(other, Frame) and self.nrows == other.nrows
                and self.names == other.names
                and all(self[n].equals(other[n]) for n in self.names))


@dataclass
class Schema:
    """Declared column kinds plus missing-value tokens.

    ``missing_tokens`` is the default token set; ``column_missing`` overrides
    it per column.
    """

    kinds: dict[str, str] = field(default_factory=dict)
    missing_tokens: tuple = DEFAULT_MISSING_TOKENS
    column_missing: dict[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        for name, kind in self.kinds.items():
            if kind not in ("numeric", "categorical"):
                raise SchemaError(f"column {name!r}: unknown kind {kind!r}")

    def tokens_for(self, name: str) -> frozenset:
        return frozenset(self.column_missing.get(name, self.missing_tokens))

    @classmethod
    def load(cls, path) -> "Schema":
        """Read ``{"col": {"kind": ..., "missing_tokens": [...]}, ...}``."""
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise SchemaError("schema file must hold a JSON object")
        kinds, missing = {}, {}
        for name, entry in raw.items():
            if not isinstance(entry, dict):
                raise SchemaError(f"schema entry for {name!r} must be an object")
            if "kind" in entry:
                kinds[name] = entry["kind"]
            if "missing_tokens" in entry:
                missing[name] = tuple(str(t) for t in entry["missing_tokens"])
        return cls(kinds, column_missing=missing)


class ColumnStats(NamedTuple):
    mean: float
    n_bad: int
    all_bad: bool


def column_stats(col: NumericColumn) -> ColumnStats:
    good = col.values[~col.bad_mask]
    n_bad = int(col.bad_mask.sum())
    if good.size == 0:
        return ColumnStats(0.0, n_bad, True)
    return ColumnStats(float(good.mean()), n_bad, False)


def read_csv(path, schema: Schema | None = None) -> Frame:
    """Read a header-first CSV file into a :class:`Frame`.

    Without a declared kind, a column is numeric iff every non-missing token
    parses as a number.  Ragged rows and duplicate header names raise
    :class:`CSVFormatError`.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return _read(fh, schema or Schema())


def read_csv_text(text: str, schema: Schema | None = None) -> Frame:
    return _read(io.StringIO(text, newline=""), schema or Schema())


def _read(fh, schema: Schema) -> Frame:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise CSVFormatError("file is empty; a header row is required") from None
    seen = set()
    for name in header:
        if not name:
            raise CSVFormatError("empty column name in header")
        if name in seen:
            raise CSVFormatError(f"duplicate column name {name!r} in header")
        seen.add(name)
    cells: list[list[str]] = [[] for _ in header]
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise CSVFormatError(
                f"row {lineno}: expected {len(header)} fields, found {len(row)}")
        for j, tok in enumerate(row):
            cells[j].append(tok)
    nrows = len(cells[0]) if cells else 0
    columns = {}
    for name, toks in zip(header, cells):
        columns[name] = _build_column(name, toks, schema)
    return Frame(columns, nrows)


def _build_column(name: str, toks: list[str], schema: Schema) -> Column:
    missing = schema.tokens_for(name)
    kind = schema.kinds.get(name)
    if kind != "categorical":
        parsed = []
        for i, tok in enumerate(toks):
            if tok in missing:
                parsed.append(math.nan)
                continue
            v = parse_number(tok)
            if v is None:
                if kind == "numeric":
                    raise SchemaError(
                        f"column {name!r} declared numeric but row {i + 2} "
                        f"holds {tok!r}")
                break
            parsed.append(v)
        else:
            vals = np.array(parsed, dtype=np.float64)
            return NumericColumn(vals, ~np.isfinite(vals))
    return CategoricalColumn.from_values(None if t in missing else t for t in toks)


def write_csv(frame: Frame, path) -> None:
    """Write ``frame`` as CSV; bad/missing cells become ``NA``.

    Floats are emitted with 17 significant digits so they read back exactly.
    """
    text = to_csv_text(frame)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def to_csv_text(frame: Frame) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(frame.names)
    columns = [frame[n].tokens() for n in frame.names]
    writer.writerows(zip(*columns))
    return buf.getvalue()


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
