"""Boosted-ensemble training and prediction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping

import numpy as np

from ..data import ColumnKind, ColumnMeta, Dataset
from ..encode import FittedEncoder, apply as encoder_apply, code_translation
from ..metrics import logloss
from .binning import FeatureBins, build_bins
from .loss import base_score, compute_grad_hess, sigmoid
from .tree import FeatureSet, GrowParams, Tree, grow_tree


class TrainError(ValueError):
    """Raised for invalid configs or incompatible datasets."""


class CatMode(str, Enum):
    NATIVE = "native"
    ENCODED = "encoded"


@dataclass(frozen=True)
class GBDTConfig:
    n_trees: int = 500
    learning_rate: float = 0.1
    max_depth: int = 6
    lam: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1.0
    max_bins: int = 256
    early_stopping_rounds: int = 50  # 0 disables early stopping
    cat_mode: CatMode = CatMode.NATIVE
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cat_mode", CatMode(self.cat_mode))
        if self.n_trees < 0:
            raise TrainError(f"n_trees must be >= 0, got {self.n_trees}")
        if self.learning_rate < 0:
            raise TrainError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.max_depth < 1:
            raise TrainError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.lam < 0 or self.gamma < 0 or self.min_child_weight < 0:
            raise TrainError("lam, gamma and min_child_weight must be >= 0")
        if not 2 <= self.max_bins <= 65536:
            raise TrainError(f"max_bins must be in [2, 65536], got {self.max_bins}")
        if self.early_stopping_rounds < 0:
            raise TrainError(f"early_stopping_rounds must be >= 0, got {self.early_stopping_rounds}")


# callback(iteration, raw_train, raw_valid); iteration 0 fires before any tree
IterationCallback = Callable[[int, np.ndarray, "np.ndarray | None"], None]


@dataclass
class Model:
    """Trained additive ensemble plus everything needed for standalone inference."""

    base_score: float
    learning_rate: float
    trees: list[Tree]
    schema: tuple[ColumnMeta, ...]
    bins: dict[str, FeatureBins]
    dictionaries: dict[str, tuple[str, ...]]
    encoder: FittedEncoder | None
    config: GBDTConfig
    metadata: dict = field(default_factory=dict)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def feature_columns(self) -> list[ColumnMeta]:
        return [c for c in self.schema if c.kind is not ColumnKind.TARGET]


def _feature_set(
    ds: Dataset,
    bins: Mapping[str, FeatureBins],
    model_dicts: Mapping[str, tuple[str, ...]],
) -> FeatureSet:
    """Bin numeric columns and translate categorical codes into fit-time codes."""
    names: list[str] = []
    kinds: dict[str, str] = {}
    codes: dict[str, np.ndarray] = {}
    n_bins: dict[str, int] = {}
    nan_bins: dict[str, int] = {}
    for meta in ds.feature_columns:
        names.append(meta.name)
        if meta.kind is ColumnKind.NUMERICAL:
            fb = bins[meta.name]
            kinds[meta.name] = "numeric"
            codes[meta.name] = fb.assign(ds.num_values[meta.name])
            n_bins[meta.name] = fb.n_bins
            nan_bins[meta.name] = fb.nan_bin
        else:
            fit_dict = model_dicts[meta.name]
            translation = code_translation(fit_dict, ds.dictionaries[meta.name])
            kinds[meta.name] = "categorical"
            codes[meta.name] = translation[ds.cat_codes[meta.name]].astype(np.int32)
            n_bins[meta.name] = len(fit_dict)
    return FeatureSet(names=names, kinds=kinds, codes=codes, n_bins=n_bins, nan_bins=nan_bins, n_rows=ds.n_rows)


def _check_compatible(model_schema: tuple[ColumnMeta, ...], ds: Dataset) -> None:
    ds_kinds = {c.name: c.kind for c in ds.schema}
    for meta in model_schema:
        if meta.kind is ColumnKind.TARGET:
            continue
        kind = ds_kinds.get(meta.name)
        if kind is None:
            raise TrainError(f"dataset is missing feature column {meta.name!r}")
        if kind is not meta.kind:
            raise TrainError(f"column {meta.name!r} is {kind.value}, model expects {meta.kind.value}")


def train(
    train_ds: Dataset,
    valid_ds: Dataset | None,
    config: GBDTConfig,
    encoder: FittedEncoder | None = None,
    callback: IterationCallback | None = None,
) -> Model:
    """Fit the boosted ensemble with optional early stopping on valid logloss.

    In encoded mode the training data must already carry numeric columns (the
    leakage-safe values from the encode pass); the fitted encoder rides along
    in the model so predict() can consume raw categorical datasets.
    """
    if train_ds.n_rows == 0:
        raise TrainError("training dataset is empty")
    if config.early_stopping_rounds > 0 and (valid_ds is None or valid_ds.n_rows == 0):
        raise TrainError("early stopping requires a non-empty validation dataset")
    if config.cat_mode is CatMode.ENCODED:
        if train_ds.categorical_columns:
            raise TrainError("cat_mode=encoded expects an encoded dataset; run the encoder first")
    elif encoder is not None:
        raise TrainError("cat_mode=native does not take an embedded encoder")

    y = train_ds.target
    if y.min() == y.max():
        warnings.warn("training target is single-class; base score clipped", RuntimeWarning, stacklevel=2)
    base = base_score(y)

    bins = build_bins(train_ds, config.max_bins)
    dictionaries = {c.name: train_ds.dictionaries[c.name] for c in train_ds.categorical_columns}
    fs_train = _feature_set(train_ds, bins, dictionaries)
    fs_valid = _feature_set(valid_ds, bins, dictionaries) if valid_ds is not None else None
    thresholds = {name: fb.edges for name, fb in bins.items()}
    params = GrowParams(
        max_depth=config.max_depth,
        lam=config.lam,
        gamma=config.gamma,
        min_child_weight=config.min_child_weight,
    )

    raw_train = np.full(train_ds.n_rows, base, dtype=np.float64)
    raw_valid = np.full(valid_ds.n_rows, base, dtype=np.float64) if valid_ds is not None else None
    valid_curve: list[float] = []
    if valid_ds is not None:
        valid_curve.append(logloss(valid_ds.target, sigmoid(raw_valid)))
    best_ll = valid_curve[0] if valid_curve else np.inf
    best_iter = 0
    if callback is not None:
        callback(0, raw_train, raw_valid)

    trees: list[Tree] = []
    for it in range(1, config.n_trees + 1):
        g, h = compute_grad_hess(y, raw_train)
        tree, train_out = grow_tree(fs_train, g, h, params, thresholds)
        trees.append(tree)
        raw_train += config.learning_rate * train_out
        if valid_ds is not None:
            raw_valid += config.learning_rate * tree.apply_binned(fs_valid)
            ll = logloss(valid_ds.target, sigmoid(raw_valid))
            valid_curve.append(ll)
            if ll < best_ll:
                best_ll, best_iter = ll, it
        if callback is not None:
            callback(it, raw_train, raw_valid)
        if (
            config.early_stopping_rounds > 0
            and it - best_iter >= config.early_stopping_rounds
        ):
            break

    n_trained = len(trees)
    if config.early_stopping_rounds > 0:
        trees = trees[:best_iter]
    else:
        best_iter = n_trained

    metadata = {
        "best_iteration": best_iter,
        "n_trees_trained": n_trained,
        "n_trees_kept": len(trees),
        "train_rows": train_ds.n_rows,
        "valid_rows": valid_ds.n_rows if valid_ds is not None else 0,
        "valid_logloss": [round(v, 12) for v in valid_curve],
        "seed": config.seed,
    }
    return Model(
        base_score=base,
        learning_rate=config.learning_rate,
        trees=trees,
        schema=train_ds.schema,
        bins=bins,
        dictionaries=dictionaries,
        encoder=encoder,
        config=config,
        metadata=metadata,
    )


def predict_raw(model: Model, ds: Dataset) -> np.ndarray:
    """Raw (pre-sigmoid) scores on raw column values."""
    if model.encoder is not None:
        ds = encoder_apply(model.encoder, ds)
    _check_compatible(model.schema, ds)
    numeric: dict[str, np.ndarray] = {}
    categorical: dict[str, np.ndarray] = {}
    for meta in model.feature_columns():
        if meta.kind is ColumnKind.NUMERICAL:
            numeric[meta.name] = ds.num_values[meta.name]
        else:
            translation = code_translation(model.dictionaries[meta.name], ds.dictionaries[meta.name])
            categorical[meta.name] = translation[ds.cat_codes[meta.name]]
    raw = np.full(ds.n_rows, model.base_score, dtype=np.float64)
    if ds.n_rows == 0:
        return raw
    scratch = np.empty(ds.n_rows, dtype=np.float64)
    for tree in model.trees:
        raw += model.learning_rate * tree.apply_raw(numeric, categorical, ds.n_rows, scratch)
    return raw


def predict(model: Model, ds: Dataset) -> np.ndarray:
    """Click probabilities: sigmoid(base + lr * sum of tree outputs)."""
    return np.asarray(sigmoid(predict_raw(model, ds)))


def with_cat_mode(config: GBDTConfig, cat_mode: CatMode | str) -> GBDTConfig:
    return replace(config, cat_mode=CatMode(cat_mode))


def with_seed(config: GBDTConfig, seed: int) -> GBDTConfig:
    return replace(config, seed=seed)
