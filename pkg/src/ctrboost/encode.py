"""Categorical encoders: label, smoothed target, K-fold target, ordered target statistics.

All target-statistics variants share the additive-smoothing form
``(target_sum + a * prior) / (count + a)``. The K-fold and ordered variants
exist to decorrelate a training row's encoded value from its own label:

* K-fold: row i in fold f is encoded from the other k-1 folds only, with the
  prior likewise computed out-of-fold, so the value never touches y_i.
* Ordered: row i is encoded from the rows preceding it in a seeded
  permutation, with a constant 0.5 prior, so again y_i never leaks in.

At apply time (valid/test/inference) every mode uses full fitting-data
statistics with the fitted global prior; the anti-leakage machinery only
shapes the training-row values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
import numpy as np

from .data import ColumnKind, ColumnMeta, Dataset


class EncodeError(ValueError):
    """Raised for invalid encoder specs or schema mismatches."""


ORDERED_TS_PRIOR = 0.5  # constant training prior; keeps row i's value independent of y_i


class EncoderMode(str, Enum):
    LABEL = "label"
    TARGET = "target"
    KFOLD_TARGET = "kfold_target"
    ORDERED_TS = "ordered_ts"
    NATIVE_PASSTHROUGH = "native_passthrough"


@dataclass(frozen=True)
class EncoderSpec:
    mode: EncoderMode = EncoderMode.TARGET
    smoothing: float = 1.0
    k_folds: int = 5
    n_permutations: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", EncoderMode(self.mode))
        if self.smoothing < 0:
            raise EncodeError(f"smoothing must be >= 0, got {self.smoothing}")
        if self.k_folds < 2:
            raise EncodeError(f"k_folds must be >= 2, got {self.k_folds}")
        if self.n_permutations < 1:
            raise EncodeError(f"n_permutations must be >= 1, got {self.n_permutations}")


@dataclass(frozen=True)
class ColumnStats:
    """Per-category target sums and counts for one fitted column."""

    name: str
    dictionary: tuple[str, ...]
    sums: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.sums.setflags(write=False)
        self.counts.setflags(write=False)

    @property
    def cardinality(self) -> int:
        return len(self.dictionary)


@dataclass(frozen=True)
class FittedEncoder:
    """Frozen per-column category statistics plus the global prior."""

    spec: EncoderSpec
    prior: float
    columns: tuple[ColumnStats, ...]
    _by_name: dict[str, ColumnStats] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_name", {c.name: c for c in self.columns})

    def column(self, name: str) -> ColumnStats:
        return self._by_name[name]

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def encoded_value(self, name: str, code: int) -> float:
        """Apply-time value for a fit-dictionary code (vectorized twin below)."""
        return float(self.apply_values(name)[code])

    def apply_values(self, name: str) -> np.ndarray:
        """Apply-time value per fit-dictionary code for one column."""
        stats = self.column(name)
        if self.spec.mode is EncoderMode.LABEL:
            return np.arange(stats.cardinality, dtype=np.float64)
        return _smoothed(stats.sums, stats.counts, self.spec.smoothing, self.prior)

    def fallback_value(self, name: str) -> float:
        """Value for categories never seen in the fitting dictionary."""
        if self.spec.mode is EncoderMode.LABEL:
            return float(self.column(name).cardinality)
        return self.prior


def _smoothed(sums: np.ndarray, counts: np.ndarray, a: float, prior: float) -> np.ndarray:
    denom = counts + a
    if a == 0.0:
        # pure category mean; zero-count categories fall back to the prior
        out = np.full(len(sums), prior, dtype=np.float64)
        nz = counts > 0
        out[nz] = sums[nz] / counts[nz]
        return out
    return (sums + a * prior) / denom


def _column_sums_counts(codes: np.ndarray, y: np.ndarray, cardinality: int) -> tuple[np.ndarray, np.ndarray]:
    sums = np.bincount(codes, weights=y, minlength=cardinality).astype(np.float64)
    counts = np.bincount(codes, minlength=cardinality).astype(np.int64)
    return sums, counts


def _require_categorical(ds: Dataset) -> list[ColumnMeta]:
    cats = ds.categorical_columns
    if not cats:
        raise EncodeError("dataset has no categorical columns to encode")
    return cats


def _fit_stats(ds: Dataset) -> tuple[float, tuple[ColumnStats, ...]]:
    prior = float(ds.target.mean()) if ds.n_rows else 0.0
    cols = []
    for meta in _require_categorical(ds):
        codes = ds.cat_codes[meta.name]
        sums, counts = _column_sums_counts(codes, ds.target, meta.cardinality or 0)
        cols.append(ColumnStats(meta.name, ds.dictionaries[meta.name], sums, counts))
    return prior, tuple(cols)


def fit_label_encoding(ds: Dataset) -> FittedEncoder:
    """Category -> its dictionary code as a float; unseen -> cardinality."""
    prior, cols = _fit_stats(ds)
    return FittedEncoder(spec=EncoderSpec(mode=EncoderMode.LABEL), prior=prior, columns=cols)


def fit_target_encoding(ds: Dataset, spec: EncoderSpec) -> FittedEncoder:
    """Smoothed mean-target encoding: (sum + a*prior) / (count + a)."""
    if spec.mode is not EncoderMode.TARGET:
        raise EncodeError(f"fit_target_encoding needs mode=target, got {spec.mode.value}")
    prior, cols = _fit_stats(ds)
    return FittedEncoder(spec=spec, prior=prior, columns=cols)


def kfold_ids(n_rows: int, k: int, seed: int) -> np.ndarray:
    """Seeded fold assignment: a shuffled round-robin, sizes differing by <= 1."""
    perm = np.random.default_rng(seed).permutation(n_rows)
    ids = np.empty(n_rows, dtype=np.int64)
    ids[perm] = np.arange(n_rows) % k
    return ids


def kfold_encode_column(
    codes: np.ndarray,
    y: np.ndarray,
    fold_ids: np.ndarray,
    cardinality: int,
    smoothing: float,
) -> np.ndarray:
    """Out-of-fold smoothed target values for each training row.

    Row i in fold f sees category statistics and prior computed from the
    other folds only, so its own label never enters its value.
    """
    k = int(fold_ids.max()) + 1
    total_sums, total_counts = _column_sums_counts(codes, y, cardinality)
    total_y = float(y.sum())
    n = len(y)
    out = np.empty(n, dtype=np.float64)
    for f in range(k):
        in_fold = fold_ids == f
        n_fold = int(in_fold.sum())
        if n_fold == 0:
            raise EncodeError(f"fold {f} is empty")
        if n_fold == n:
            raise EncodeError("all rows fell into one fold; reduce k or add rows")
        fold_sums, fold_counts = _column_sums_counts(codes[in_fold], y[in_fold], cardinality)
        other_sums = total_sums - fold_sums
        other_counts = total_counts - fold_counts
        other_prior = (total_y - float(y[in_fold].sum())) / (n - n_fold)
        values = _smoothed(other_sums, other_counts, smoothing, other_prior)
        out[in_fold] = values[codes[in_fold]]
    return out


def fit_apply_kfold_target_encoding(ds: Dataset, spec: EncoderSpec) -> tuple[dict[str, np.ndarray], FittedEncoder]:
    """K-fold target encoding: per-row out-of-fold training values + full-data encoder."""
    if spec.mode is not EncoderMode.KFOLD_TARGET:
        raise EncodeError(f"fit_apply_kfold_target_encoding needs mode=kfold_target, got {spec.mode.value}")
    if ds.n_rows < spec.k_folds:
        raise EncodeError(f"n_rows={ds.n_rows} < k_folds={spec.k_folds}: some folds would be empty")
    prior, cols = _fit_stats(ds)
    folds = kfold_ids(ds.n_rows, spec.k_folds, spec.seed)
    train_values = {
        c.name: kfold_encode_column(ds.cat_codes[c.name], ds.target, folds, c.cardinality, spec.smoothing)
        for c in cols
    }
    return train_values, FittedEncoder(spec=spec, prior=prior, columns=cols)


def ordered_encode_column(
    codes: np.ndarray,
    y: np.ndarray,
    order: np.ndarray,
    cardinality: int,
    smoothing: float,
    prior: float = ORDERED_TS_PRIOR,
) -> np.ndarray:
    """Running-prefix smoothed target values along one permutation.

    The row at position t of ``order`` is encoded from same-category rows at
    positions < t only; the first occurrence of any category gets the prior.
    """
    n = len(y)
    out = np.empty(n, dtype=np.float64)
    run_sums = np.zeros(cardinality, dtype=np.float64)
    run_counts = np.zeros(cardinality, dtype=np.int64)
    a = smoothing
    for t in range(n):
        i = order[t]
        c = codes[i]
        count = run_counts[c]
        if a == 0.0:
            out[i] = run_sums[c] / count if count > 0 else prior
        else:
            out[i] = (run_sums[c] + a * prior) / (count + a)
        run_sums[c] += y[i]
        run_counts[c] += 1
    return out


def fit_apply_ordered_ts(ds: Dataset, spec: EncoderSpec) -> tuple[dict[str, np.ndarray], FittedEncoder]:
    """Ordered target statistics: permutation-prefix training values + full-data encoder.

    With n_permutations > 1 the per-permutation values are averaged.
    """
    if spec.mode is not EncoderMode.ORDERED_TS:
        raise EncodeError(f"fit_apply_ordered_ts needs mode=ordered_ts, got {spec.mode.value}")
    prior, cols = _fit_stats(ds)
    rng = np.random.default_rng(spec.seed)
    orders = [rng.permutation(ds.n_rows) for _ in range(spec.n_permutations)]
    train_values: dict[str, np.ndarray] = {}
    for c in cols:
        acc = np.zeros(ds.n_rows, dtype=np.float64)
        for order in orders:
            acc += ordered_encode_column(ds.cat_codes[c.name], ds.target, order, c.cardinality, spec.smoothing)
        train_values[c.name] = acc / spec.n_permutations
    return train_values, FittedEncoder(spec=spec, prior=prior, columns=cols)


def code_translation(fit_dictionary: tuple[str, ...], apply_dictionary: tuple[str, ...]) -> np.ndarray:
    """Map apply-dataset codes to fit-dataset codes; -1 marks unseen categories."""
    if fit_dictionary == apply_dictionary:
        return np.arange(len(fit_dictionary), dtype=np.int64)
    lookup = {name: i for i, name in enumerate(fit_dictionary)}
    return np.array([lookup.get(name, -1) for name in apply_dictionary], dtype=np.int64)


def encoded_column(enc: FittedEncoder, ds: Dataset, name: str) -> np.ndarray:
    """Apply-time numeric values for one categorical column of ``ds``."""
    stats = enc.column(name)
    translation = code_translation(stats.dictionary, ds.dictionaries[name])
    per_code = np.append(enc.apply_values(name), enc.fallback_value(name))
    fit_codes = translation[ds.cat_codes[name]]  # -1 indexes the appended fallback
    return per_code[fit_codes]


def apply(enc: FittedEncoder | None, ds: Dataset) -> Dataset:
    """Replace categorical columns with fitted numeric values (full-data statistics).

    Passthrough mode (or enc=None) returns the dataset unchanged; columns the
    encoder never saw raise. Already-numeric datasets come back as-is, which
    makes a second application the identity.
    """
    if enc is None or enc.spec.mode is EncoderMode.NATIVE_PASSTHROUGH:
        return ds
    cats = ds.categorical_columns
    if not cats:
        return ds
    missing = [c.name for c in cats if c.name not in enc.column_names]
    if missing:
        raise EncodeError(f"encoder was not fitted on categorical columns {missing}")
    schema: list[ColumnMeta] = []
    num_values: dict[str, np.ndarray] = dict(ds.num_values)
    for meta in ds.schema:
        if meta.kind is ColumnKind.CATEGORICAL:
            schema.append(ColumnMeta(meta.name, ColumnKind.NUMERICAL))
            num_values[meta.name] = encoded_column(enc, ds, meta.name)
        else:
            schema.append(meta)
    return ds.replace_columns(schema=schema, cat_codes={}, dictionaries={}, num_values=num_values)


def encode_for_training(ds: Dataset, spec: EncoderSpec) -> tuple[Dataset, FittedEncoder | None]:
    """Fit on ``ds`` and return the leakage-safe training view plus the encoder.

    Label and plain target modes train on the same values apply() would
    produce; kfold/ordered train on their per-row decorrelated values.
    """
    mode = spec.mode
    if mode is EncoderMode.NATIVE_PASSTHROUGH:
        return ds, None
    if mode is EncoderMode.LABEL:
        enc = fit_label_encoding(ds)
        return apply(enc, ds), enc
    if mode is EncoderMode.TARGET:
        enc = fit_target_encoding(ds, spec)
        return apply(enc, ds), enc
    if mode is EncoderMode.KFOLD_TARGET:
        train_values, enc = fit_apply_kfold_target_encoding(ds, spec)
    elif mode is EncoderMode.ORDERED_TS:
        train_values, enc = fit_apply_ordered_ts(ds, spec)
    else:  # pragma: no cover
        raise EncodeError(f"unhandled mode {mode}")
    schema = [
        ColumnMeta(m.name, ColumnKind.NUMERICAL) if m.kind is ColumnKind.CATEGORICAL else m
        for m in ds.schema
    ]
    num_values = dict(ds.num_values)
    num_values.update(train_values)
    encoded = ds.replace_columns(schema=schema, cat_codes={}, dictionaries={}, num_values=num_values)
    return encoded, enc


def with_seed(spec: EncoderSpec, seed: int) -> EncoderSpec:
    return replace(spec, seed=seed)
