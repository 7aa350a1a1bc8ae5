"""Quantile binning of numerical features for histogram split finding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset


@dataclass(frozen=True)
class FeatureBins:
    """Bin edges for one numerical feature.

    ``edges`` are ascending cut points: bin b covers (edges[b-1], edges[b]],
    bin 0 is (-inf, edges[0]] and the last value bin is (edges[-1], +inf).
    NaN occupies its own reserved bin with index ``n_value_bins``.
    """

    column: str
    edges: np.ndarray

    def __post_init__(self) -> None:
        self.edges.setflags(write=False)

    @property
    def n_value_bins(self) -> int:
        return len(self.edges) + 1

    @property
    def nan_bin(self) -> int:
        return self.n_value_bins

    @property
    def n_bins(self) -> int:
        return self.n_value_bins + 1

    def assign(self, values: np.ndarray) -> np.ndarray:
        """Bin index per value; a cut after bin c keeps exactly values <= edges[c] left."""
        bins = np.searchsorted(self.edges, values, side="left").astype(np.int32)
        bins[np.isnan(values)] = self.nan_bin
        return bins


def build_feature_bins(column: str, values: np.ndarray, max_bins: int) -> FeatureBins:
    """Quantile-based edges from training values (NaN excluded).

    Few distinct values get one bin each (edges at midpoints); otherwise edges
    sit at the 1/max_bins ... (max_bins-1)/max_bins quantiles, deduplicated.
    """
    if max_bins < 2:
        raise ValueError(f"max_bins must be >= 2, got {max_bins}")
    finite = values[~np.isnan(values)]
    distinct = np.unique(finite)
    if len(distinct) <= 1:
        edges = np.empty(0, dtype=np.float64)
    elif len(distinct) <= max_bins:
        edges = (distinct[:-1] + distinct[1:]) / 2.0
    else:
        qs = np.quantile(finite, np.arange(1, max_bins) / max_bins)
        edges = np.unique(qs)
    return FeatureBins(column=column, edges=edges.astype(np.float64))


def build_bins(train: Dataset, max_bins: int) -> dict[str, FeatureBins]:
    """FeatureBins for every numerical feature column of the training data."""
    return {
        meta.name: build_feature_bins(meta.name, train.num_values[meta.name], max_bins)
        for meta in train.numerical_columns
    }
