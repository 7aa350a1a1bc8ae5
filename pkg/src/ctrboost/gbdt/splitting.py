"""Second-order split gain and best-split search over histograms.

Numeric features scan left-prefix cuts over value bins; categorical features
sort categories by g/(h + eps) and scan prefixes of that order (Fisher-style
grouping), which turns the 2^(k-1)-1 partition search into a linear scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .histogram import Histogram

CAT_ORDER_EPS = 1.0  # hessian smoothing in the category ordering ratio


@dataclass(frozen=True)
class SplitCandidate:
    """Best split found for one feature at one node."""

    kind: str  # "numeric" | "categorical"
    gain: float
    default_left: bool
    bin: int = -1  # numeric: last value bin kept on the left
    left_cats: np.ndarray | None = None  # categorical: sorted left-set codes


def split_gain(
    g_left: float | np.ndarray,
    h_left: float | np.ndarray,
    g_right: float | np.ndarray,
    h_right: float | np.ndarray,
    lam: float,
    gamma: float,
):
    """0.5 * [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma."""
    parent_g = g_left + g_right
    parent_h = h_left + h_right
    return 0.5 * (
        g_left**2 / (h_left + lam)
        + g_right**2 / (h_right + lam)
        - parent_g**2 / (parent_h + lam)
    ) - gamma


def _pick_best(gains: np.ndarray, valid: np.ndarray) -> int | None:
    """Index of the maximal positive gain; ties resolve to the earliest index."""
    masked = np.where(valid, gains, -np.inf)
    if not len(masked):
        return None
    best = int(np.argmax(masked))
    if not np.isfinite(masked[best]) or masked[best] <= 0.0:
        return None
    return best


def best_numeric_split(
    hist: Histogram,
    nan_bin: int,
    lam: float,
    gamma: float,
    min_child_weight: float,
) -> SplitCandidate | None:
    """Best prefix cut over value bins; missing mass joins the heavier-hessian side."""
    vg = hist.grad[:nan_bin]
    vh = hist.hess[:nan_bin]
    vc = hist.count[:nan_bin]
    if nan_bin < 2:
        return None
    g_miss = float(hist.grad[nan_bin])
    h_miss = float(hist.hess[nan_bin])
    c_miss = int(hist.count[nan_bin])
    total_g, total_h, total_c = hist.totals

    g_pre = np.cumsum(vg)[:-1]
    h_pre = np.cumsum(vh)[:-1]
    c_pre = np.cumsum(vc)[:-1]
    g_rest = (total_g - g_miss) - g_pre
    h_rest = (total_h - h_miss) - h_pre
    default_left = h_pre >= h_rest

    g_l = g_pre + np.where(default_left, g_miss, 0.0)
    h_l = h_pre + np.where(default_left, h_miss, 0.0)
    c_l = c_pre + np.where(default_left, c_miss, 0)
    g_r = total_g - g_l
    h_r = total_h - h_l
    c_r = total_c - c_l

    valid = (c_l > 0) & (c_r > 0) & (h_l >= min_child_weight) & (h_r >= min_child_weight)
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = split_gain(g_l, h_l, g_r, h_r, lam, gamma)
    gains = np.nan_to_num(gains, nan=-np.inf, posinf=-np.inf, neginf=-np.inf)
    best = _pick_best(gains, valid)
    if best is None:
        return None
    return SplitCandidate(
        kind="numeric",
        gain=float(gains[best]),
        default_left=bool(default_left[best]),
        bin=best,
    )


def best_categorical_split(
    hist: Histogram,
    lam: float,
    gamma: float,
    min_child_weight: float,
    order_eps: float = CAT_ORDER_EPS,
) -> SplitCandidate | None:
    """Fisher-style scan: sort present categories by g/(h+eps), cut the sorted order."""
    present = np.flatnonzero(hist.count > 0)
    if len(present) < 2:
        return None
    g_c = hist.grad[present]
    h_c = hist.hess[present]
    c_c = hist.count[present]
    order = np.argsort(g_c / (h_c + order_eps), kind="stable")

    g_pre = np.cumsum(g_c[order])[:-1]
    h_pre = np.cumsum(h_c[order])[:-1]
    c_pre = np.cumsum(c_c[order])[:-1]
    total_g, total_h, total_c = float(g_c.sum()), float(h_c.sum()), int(c_c.sum())
    g_r = total_g - g_pre
    h_r = total_h - h_pre
    c_r = total_c - c_pre

    valid = (c_pre > 0) & (c_r > 0) & (h_pre >= min_child_weight) & (h_r >= min_child_weight)
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = split_gain(g_pre, h_pre, g_r, h_r, lam, gamma)
    gains = np.nan_to_num(gains, nan=-np.inf, posinf=-np.inf, neginf=-np.inf)
    best = _pick_best(gains, valid)
    if best is None:
        return None
    left_cats = np.sort(present[order[: best + 1]]).astype(np.int32)
    return SplitCandidate(
        kind="categorical",
        gain=float(gains[best]),
        default_left=bool(h_pre[best] >= h_r[best]),
        left_cats=left_cats,
    )
