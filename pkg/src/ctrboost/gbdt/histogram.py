"""Per-bin gradient/hessian accumulation for one tree node."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Histogram:
    """Sums of g, h and row counts per bin of one feature at one node."""

    grad: np.ndarray
    hess: np.ndarray
    count: np.ndarray

    def subtract(self, other: "Histogram") -> "Histogram":
        """Sibling histogram via parent - child."""
        return Histogram(self.grad - other.grad, self.hess - other.hess, self.count - other.count)

    @property
    def totals(self) -> tuple[float, float, int]:
        return float(self.grad.sum()), float(self.hess.sum()), int(self.count.sum())


def build_histogram(bin_codes: np.ndarray, g: np.ndarray, h: np.ndarray, n_bins: int, rows: np.ndarray | None = None) -> Histogram:
    """Accumulate (G, H, count) per bin over the given rows (all rows if None)."""
    if rows is not None:
        bin_codes = bin_codes[rows]
        g = g[rows]
        h = h[rows]
    if len(bin_codes) == 0:
        raise ValueError("histogram over zero rows")
    return Histogram(
        grad=np.bincount(bin_codes, weights=g, minlength=n_bins),
        hess=np.bincount(bin_codes, weights=h, minlength=n_bins),
        count=np.bincount(bin_codes, minlength=n_bins).astype(np.int64),
    )


def build_histograms(
    feature_codes: dict[str, np.ndarray],
    feature_n_bins: dict[str, int],
    g: np.ndarray,
    h: np.ndarray,
    rows: np.ndarray | None = None,
) -> dict[str, Histogram]:
    """Histograms for every feature at one node, merged in feature order."""
    return {
        name: build_histogram(codes, g, h, feature_n_bins[name], rows)
        for name, codes in feature_codes.items()
    }
