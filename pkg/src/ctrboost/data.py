"""Columnar dataset: CSV ingestion, dictionary coding, splitting, subsampling.

Categorical columns are dictionary-coded integers (first-appearance order),
numerical columns are float64 with NaN for missing/unparseable cells, and the
target is a binary {0,1} array. Datasets are immutable after construction;
every derived view (split, subsample) shares the parent's dictionaries so
category codes stay comparable across train/valid/test.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

MISSING_CATEGORY = "__missing__"

_TRUE_TOKENS = {"1", "true"}
_FALSE_TOKENS = {"0", "false"}


class DataError(ValueError):
    """Raised for malformed input files, schemas, or degenerate requests."""


class ColumnKind(str, Enum):
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"
    TARGET = "target"


@dataclass(frozen=True)
class ColumnMeta:
    """Name, kind and (for categorical columns) dictionary size."""

    name: str
    kind: ColumnKind
    cardinality: int | None = None

    def __post_init__(self) -> None:
        if self.kind is ColumnKind.CATEGORICAL:
            if self.cardinality is None or self.cardinality < 1:
                raise DataError(f"categorical column {self.name!r} needs a positive cardinality")
        elif self.cardinality is not None:
            raise DataError(f"column {self.name!r} of kind {self.kind.value} must not set cardinality")


@dataclass(frozen=True)
class SplitSpec:
    """Train/valid/test fractions (summing to 1) and the shuffle seed."""

    train_frac: float = 0.8
    valid_frac: float = 0.1
    test_frac: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        fracs = (self.train_frac, self.valid_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise DataError(f"split fractions must be positive, got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1, got {sum(fracs)!r}")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Immutable columnar table.

    ``cat_codes[name]`` holds int32 dictionary codes into ``dictionaries[name]``,
    ``num_values[name]`` holds float64 values (NaN = missing), ``target`` holds
    the binary labels. All arrays are length ``n_rows`` and write-protected.
    """

    schema: tuple[ColumnMeta, ...]
    cat_codes: Mapping[str, np.ndarray]
    dictionaries: Mapping[str, tuple[str, ...]]
    num_values: Mapping[str, np.ndarray]
    target: np.ndarray
    n_rows: int = field(init=False)

    def __post_init__(self) -> None:
        targets = [c for c in self.schema if c.kind is ColumnKind.TARGET]
        if len(targets) != 1:
            raise DataError(f"schema must contain exactly one target column, found {len(targets)}")
        n = len(self.target)
        object.__setattr__(self, "n_rows", n)
        for meta in self.schema:
            if meta.kind is ColumnKind.CATEGORICAL:
                codes = self.cat_codes[meta.name]
                if len(codes) != n:
                    raise DataError(f"column {meta.name!r} length {len(codes)} != n_rows {n}")
                if len(self.dictionaries[meta.name]) != meta.cardinality:
                    raise DataError(f"dictionary size mismatch for {meta.name!r}")
                if len(codes) and (codes.min() < 0 or codes.max() >= meta.cardinality):
                    raise DataError(f"codes out of range for {meta.name!r}")
                _freeze(codes)
            elif meta.kind is ColumnKind.NUMERICAL:
                vals = self.num_values[meta.name]
                if len(vals) != n:
                    raise DataError(f"column {meta.name!r} length {len(vals)} != n_rows {n}")
                _freeze(vals)
        tgt = np.asarray(self.target)
        if not np.isin(tgt, (0.0, 1.0)).all():
            raise DataError("target values must all be 0 or 1")
        _freeze(tgt)

    @property
    def target_name(self) -> str:
        return next(c.name for c in self.schema if c.kind is ColumnKind.TARGET)

    @property
    def categorical_columns(self) -> list[ColumnMeta]:
        return [c for c in self.schema if c.kind is ColumnKind.CATEGORICAL]

    @property
    def numerical_columns(self) -> list[ColumnMeta]:
        return [c for c in self.schema if c.kind is ColumnKind.NUMERICAL]

    @property
    def feature_columns(self) -> list[ColumnMeta]:
        return [c for c in self.schema if c.kind is not ColumnKind.TARGET]

    def decode(self, column: str, row: int) -> str:
        """Raw string behind a categorical cell."""
        return self.dictionaries[column][int(self.cat_codes[column][row])]

    def take(self, indices: np.ndarray | Sequence[int]) -> "Dataset":
        """Row subset (dictionaries and schema shared with the parent)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            cat_codes={k: v[idx].copy() for k, v in self.cat_codes.items()},
            dictionaries=self.dictionaries,
            num_values={k: v[idx].copy() for k, v in self.num_values.items()},
            target=self.target[idx].copy(),
        )

    def replace_columns(
        self,
        schema: Sequence[ColumnMeta],
        cat_codes: Mapping[str, np.ndarray],
        dictionaries: Mapping[str, tuple[str, ...]],
        num_values: Mapping[str, np.ndarray],
    ) -> "Dataset":
        """New dataset with the same target but different feature columns."""
        return Dataset(
            schema=tuple(schema),
            cat_codes=dict(cat_codes),
            dictionaries=dict(dictionaries),
            num_values=dict(num_values),
            target=self.target,
        )


def from_arrays(
    *,
    categorical: Mapping[str, tuple[Sequence[int], Sequence[str]]] | None = None,
    numerical: Mapping[str, Sequence[float]] | None = None,
    target: Sequence[float],
    target_name: str = "label",
) -> Dataset:
    """Build a Dataset directly from arrays; convenient for generators and tests.

    ``categorical`` maps name -> (codes, dictionary). Schema order is
    categorical columns first, then numerical, then the target.
    """
    categorical = categorical or {}
    numerical = numerical or {}
    schema: list[ColumnMeta] = []
    cat_codes: dict[str, np.ndarray] = {}
    dicts: dict[str, tuple[str, ...]] = {}
    for name, (codes, dictionary) in categorical.items():
        dictionary = tuple(dictionary)
        schema.append(ColumnMeta(name, ColumnKind.CATEGORICAL, len(dictionary)))
        cat_codes[name] = np.asarray(codes, dtype=np.int32).copy()
        dicts[name] = dictionary
    num_values = {}
    for name, vals in numerical.items():
        schema.append(ColumnMeta(name, ColumnKind.NUMERICAL))
        num_values[name] = np.asarray(vals, dtype=np.float64).copy()
    schema.append(ColumnMeta(target_name, ColumnKind.TARGET))
    return Dataset(
        schema=tuple(schema),
        cat_codes=cat_codes,
        dictionaries=dicts,
        num_values=num_values,
        target=np.asarray(target, dtype=np.float64).copy(),
    )


def read_schema_hint(path: str | Path) -> dict[str, str]:
    """Parse a schema hint file: one `column = kind` per line, `#` comments.

    Kinds are ``categorical``, ``numerical`` and ``target`` (case-insensitive).
    """
    hints: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'column = kind', got {raw!r}")
        name, kind = (part.strip() for part in line.split("=", 1))
        kind = kind.lower()
        if kind not in {k.value for k in ColumnKind}:
            raise DataError(f"{path}:{lineno}: unknown column kind {kind!r}")
        if name in hints:
            raise DataError(f"{path}:{lineno}: duplicate hint for column {name!r}")
        hints[name] = kind
    return hints


def _parse_target_cell(cell: str, column: str) -> float:
    token = cell.strip().lower()
    if token in _TRUE_TOKENS:
        return 1.0
    if token in _FALSE_TOKENS:
        return 0.0
    raise DataError(f"target column {column!r} has non-binary value {cell!r}")


def _looks_numeric(values: Iterable[str]) -> bool:
    seen_any = False
    for v in values:
        if v == "":
            continue
        seen_any = True
        try:
            float(v)
        except ValueError:
            return False
    return seen_any


def _encode_categorical(raw: list[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Dictionary-code raw strings in first-appearance order.

    Empty cells become the reserved MISSING_CATEGORY which, when present,
    is pulled to code 0; all other categories keep first-appearance order.
    """
    mapping: dict[str, int] = {}
    codes = np.empty(len(raw), dtype=np.int32)
    has_missing = False
    for i, cell in enumerate(raw):
        key = cell if cell != "" else MISSING_CATEGORY
        if key == MISSING_CATEGORY:
            has_missing = True
        code = mapping.get(key)
        if code is None:
            code = len(mapping)
            mapping[key] = code
        codes[i] = code
    dictionary = list(mapping)
    if has_missing and dictionary[0] != MISSING_CATEGORY:
        old = mapping[MISSING_CATEGORY]
        dictionary.insert(0, dictionary.pop(old))
        remap = np.empty(len(mapping), dtype=np.int32)
        for new_code, name in enumerate(dictionary):
            remap[mapping[name]] = new_code
        codes = remap[codes]
    return codes, tuple(dictionary)


def load_csv(
    path: str | Path,
    schema_hint: Mapping[str, str] | str | Path | None = None,
    target: str | None = None,
    delimiter: str = ",",
) -> Dataset:
    """Load an RFC-4180-style CSV with header into a Dataset.

    Column kinds come from ``schema_hint`` (a mapping or a hint-file path);
    unhinted columns fall back to a numeric-or-categorical scan. The target
    column must be named either through the hint file or ``target``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if isinstance(schema_hint, (str, Path)):
        hints = read_schema_hint(schema_hint)
    else:
        hints = dict(schema_hint or {})
    if target is not None:
        existing = hints.get(target)
        if existing not in (None, ColumnKind.TARGET.value):
            raise DataError(f"target {target!r} conflicts with hint kind {existing!r}")
        hints[target] = ColumnKind.TARGET.value

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        if any(name.strip() == "" for name in header):
            raise DataError(f"{path}: blank column name in header")
        if len(set(header)) != len(header):
            dupes = sorted({n for n in header if header.count(n) > 1})
            raise DataError(f"{path}: duplicate header names {dupes}")
        columns: dict[str, list[str]] = {name: [] for name in header}
        for row_idx, row in enumerate(reader, 2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_idx} has {len(row)} cells, expected {len(header)}")
            for name, cell in zip(header, row):
                columns[name].append(cell)

    unknown = set(hints) - set(header)
    if unknown:
        raise DataError(f"{path}: schema hint names absent from header: {sorted(unknown)}")
    target_cols = [name for name, kind in hints.items() if kind == ColumnKind.TARGET.value]
    if len(target_cols) != 1:
        raise DataError(
            f"{path}: exactly one target column must be declared via hint or target=, got {target_cols}"
        )

    schema: list[ColumnMeta] = []
    cat_codes: dict[str, np.ndarray] = {}
    dicts: dict[str, tuple[str, ...]] = {}
    num_values: dict[str, np.ndarray] = {}
    target_arr: np.ndarray | None = None
    for name in header:
        raw = columns[name]
        kind = hints.get(name)
        if kind is None:
            kind = ColumnKind.NUMERICAL.value if _looks_numeric(raw) else ColumnKind.CATEGORICAL.value
        if kind == ColumnKind.TARGET.value:
            target_arr = np.array([_parse_target_cell(c, name) for c in raw], dtype=np.float64)
            schema.append(ColumnMeta(name, ColumnKind.TARGET))
        elif kind == ColumnKind.NUMERICAL.value:
            vals = np.empty(len(raw), dtype=np.float64)
            for i, cell in enumerate(raw):
                try:
                    vals[i] = float(cell) if cell.strip() != "" else math.nan
                except ValueError:
                    vals[i] = math.nan
            num_values[name] = vals
            schema.append(ColumnMeta(name, ColumnKind.NUMERICAL))
        else:
            codes, dictionary = _encode_categorical(raw)
            cat_codes[name] = codes
            dicts[name] = dictionary
            schema.append(ColumnMeta(name, ColumnKind.CATEGORICAL, len(dictionary)))

    assert target_arr is not None
    return Dataset(
        schema=tuple(schema),
        cat_codes=cat_codes,
        dictionaries=dicts,
        num_values=num_values,
        target=target_arr,
    )


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded random row partition into (train, valid, test).

    Part sizes are floor(frac * n) with the remainder going to train; the
    same seed always yields the same partition.
    """
    n = ds.n_rows
    if n < 10:
        raise DataError(f"need at least 10 rows to split, got {n}")
    # +1e-9 guards the floor against representation error (0.3 * 10 == 2.999...96)
    n_valid = math.floor(spec.valid_frac * n + 1e-9)
    n_test = math.floor(spec.test_frac * n + 1e-9)
    n_train = n - n_valid - n_test
    if min(n_train, n_valid, n_test) < 1:
        raise DataError(f"degenerate split {spec} for n={n}: a part would be empty")
    perm = np.random.default_rng(spec.seed).permutation(n)
    return (
        ds.take(perm[:n_train]),
        ds.take(perm[n_train : n_train + n_valid]),
        ds.take(perm[n_train + n_valid :]),
    )


def subsample(ds: Dataset, fraction: float, seed: int) -> Dataset:
    """Uniform sample without replacement of floor(fraction * n) rows."""
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"fraction must be in (0, 1], got {fraction}")
    k = math.floor(fraction * ds.n_rows + 1e-9)
    if k < 1:
        raise DataError(f"subsample of {ds.n_rows} rows at fraction {fraction} would be empty")
    perm = np.random.default_rng(seed).permutation(ds.n_rows)
    return ds.take(perm[:k])
