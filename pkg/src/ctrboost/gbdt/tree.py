"""Flat tree structure and the depth-wise histogram grower."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .histogram import Histogram, build_histogram
from .splitting import SplitCandidate, best_categorical_split, best_numeric_split

LEAF, NUMERIC, CATEGORICAL = 0, 1, 2


@dataclass
class GrowParams:
    """Split-search knobs the grower needs from the full config."""

    max_depth: int
    lam: float
    gamma: float
    min_child_weight: float


@dataclass
class FeatureSet:
    """Node-traversal view of the training (or validation) data.

    ``codes[name]`` holds bin indices for numeric features and dictionary
    codes for categorical ones; ``nan_bins[name]`` exists for numeric features
    only. ``raw`` marks code arrays where -1 denotes an unseen category.
    """

    names: list[str]
    kinds: dict[str, str]  # "numeric" | "categorical"
    codes: dict[str, np.ndarray]
    n_bins: dict[str, int]
    nan_bins: dict[str, int]
    n_rows: int


@dataclass
class Tree:
    """One regression tree as parallel node arrays (index 0 = root)."""

    kind: list[int] = field(default_factory=list)
    feature: list[str] = field(default_factory=list)
    bin: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left_cats: list[np.ndarray | None] = field(default_factory=list)
    default_left: list[bool] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    weight: list[float] = field(default_factory=list)

    def _new_node(self) -> int:
        self.kind.append(LEAF)
        self.feature.append("")
        self.bin.append(-1)
        self.threshold.append(np.nan)
        self.left_cats.append(None)
        self.default_left.append(True)
        self.left.append(-1)
        self.right.append(-1)
        self.weight.append(0.0)
        return len(self.kind) - 1

    def set_leaf(self, node: int, weight: float) -> None:
        self.kind[node] = LEAF
        self.weight[node] = weight

    def set_split(self, node: int, cand: SplitCandidate, feature: str, threshold: float) -> tuple[int, int]:
        self.feature[node] = feature
        self.default_left[node] = cand.default_left
        if cand.kind == "numeric":
            self.kind[node] = NUMERIC
            self.bin[node] = cand.bin
            self.threshold[node] = threshold
        else:
            self.kind[node] = CATEGORICAL
            self.left_cats[node] = cand.left_cats
        left = self._new_node()
        right = self._new_node()
        self.left[node], self.right[node] = left, right
        return left, right

    @property
    def n_nodes(self) -> int:
        return len(self.kind)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.kind[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max()) if self.n_nodes else 0

    def apply_binned(self, fs: FeatureSet, out: np.ndarray | None = None) -> np.ndarray:
        """Leaf weight per row for pre-binned data (training/validation path)."""
        if out is None:
            out = np.empty(fs.n_rows, dtype=np.float64)
        stack = [(0, np.arange(fs.n_rows, dtype=np.int64))]
        while stack:
            node, rows = stack.pop()
            if self.kind[node] == LEAF:
                out[rows] = self.weight[node]
                continue
            codes = fs.codes[self.feature[node]][rows]
            if self.kind[node] == NUMERIC:
                left_mask = codes <= self.bin[node]
                if self.default_left[node]:
                    left_mask |= codes == fs.nan_bins[self.feature[node]]
            else:
                left_mask = _membership(codes, self.left_cats[node], self.default_left[node])
            stack.append((self.left[node], rows[left_mask]))
            stack.append((self.right[node], rows[~left_mask]))
        return out

    def apply_raw(
        self,
        numeric: dict[str, np.ndarray],
        categorical: dict[str, np.ndarray],
        n_rows: int,
        out: np.ndarray | None = None,
    ) -> np.ndarray:
        """Leaf weight per row for raw values; NaN and unseen codes (-1) go to default."""
        if out is None:
            out = np.empty(n_rows, dtype=np.float64)
        stack = [(0, np.arange(n_rows, dtype=np.int64))]
        while stack:
            node, rows = stack.pop()
            if self.kind[node] == LEAF:
                out[rows] = self.weight[node]
                continue
            name = self.feature[node]
            if self.kind[node] == NUMERIC:
                vals = numeric[name][rows]
                left_mask = vals <= self.threshold[node]
                if self.default_left[node]:
                    left_mask |= np.isnan(vals)
            else:
                left_mask = _membership(categorical[name][rows], self.left_cats[node], self.default_left[node])
            stack.append((self.left[node], rows[left_mask]))
            stack.append((self.right[node], rows[~left_mask]))
        return out


def _membership(codes: np.ndarray, left_cats: np.ndarray, default_left: bool) -> np.ndarray:
    mask = np.isin(codes, left_cats)
    if default_left:
        mask |= codes < 0
    return mask


def _best_split_for_node(hists: dict[str, Histogram], fs: FeatureSet, params: GrowParams) -> tuple[str, SplitCandidate] | None:
    best: tuple[str, SplitCandidate] | None = None
    for name in fs.names:  # ascending feature order; strict > keeps the earliest on ties
        if fs.kinds[name] == "numeric":
            cand = best_numeric_split(hists[name], fs.nan_bins[name], params.lam, params.gamma, params.min_child_weight)
        else:
            cand = best_categorical_split(hists[name], params.lam, params.gamma, params.min_child_weight)
        if cand is not None and (best is None or cand.gain > best[1].gain):
            best = (name, cand)
    return best


def grow_tree(
    fs: FeatureSet,
    g: np.ndarray,
    h: np.ndarray,
    params: GrowParams,
    thresholds: dict[str, np.ndarray],
    rows: np.ndarray | None = None,
) -> tuple[Tree, np.ndarray]:
    """Depth-wise growth; returns the tree and its output on the training rows.

    ``thresholds[name]`` maps a numeric feature's bin index to the raw-value
    cut stored on the node. Leaf weight is -G/(H+lam); sibling histograms are
    derived by subtraction from the parent.
    """
    if rows is None:
        rows = np.arange(fs.n_rows, dtype=np.int64)
    if len(rows) == 0:
        raise ValueError("cannot grow a tree on zero rows")
    train_out = np.zeros(fs.n_rows, dtype=np.float64)
    tree = Tree()
    root = tree._new_node()
    root_hists = {name: build_histogram(fs.codes[name], g, h, fs.n_bins[name], rows) for name in fs.names}
    frontier: list[tuple[int, np.ndarray, dict[str, Histogram]]] = [(root, rows, root_hists)]

    for depth in range(params.max_depth + 1):
        next_frontier: list[tuple[int, np.ndarray, dict[str, Histogram]]] = []
        for node, node_rows, hists in frontier:
            choice = _best_split_for_node(hists, fs, params) if depth < params.max_depth else None
            if choice is None:
                g_sum = float(g[node_rows].sum())
                h_sum = float(h[node_rows].sum())
                weight = -g_sum / (h_sum + params.lam)
                tree.set_leaf(node, weight)
                train_out[node_rows] = weight
                continue
            name, cand = choice
            codes = fs.codes[name][node_rows]
            if cand.kind == "numeric":
                threshold = float(thresholds[name][cand.bin])
                left_mask = codes <= cand.bin
                if cand.default_left:
                    left_mask |= codes == fs.nan_bins[name]
            else:
                threshold = np.nan
                left_mask = np.isin(codes, cand.left_cats)
            left_id, right_id = tree.set_split(node, cand, name, threshold)
            left_rows = node_rows[left_mask]
            right_rows = node_rows[~left_mask]
            # build the smaller child's histograms, derive the sibling by subtraction
            if len(left_rows) <= len(right_rows):
                small_rows, small_id, big_id, big_rows = left_rows, left_id, right_id, right_rows
            else:
                small_rows, small_id, big_id, big_rows = right_rows, right_id, left_id, left_rows
            small_hists = {
                name2: build_histogram(fs.codes[name2], g, h, fs.n_bins[name2], small_rows) for name2 in fs.names
            }
            big_hists = {name2: hists[name2].subtract(small_hists[name2]) for name2 in fs.names}
            next_frontier.append((small_id, small_rows, small_hists))
            next_frontier.append((big_id, big_rows, big_hists))
        frontier = sorted(next_frontier, key=lambda item: item[0])
        if not frontier:
            break
    return tree, train_out
