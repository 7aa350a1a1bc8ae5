"""Evaluation metrics (logloss, AUROC) and multi-run aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np


class MetricError(ValueError):
    """Raised when a metric is undefined for the given inputs."""


@dataclass(frozen=True)
class EvalResult:
    logloss: float
    auroc: float
    n_rows: int


@dataclass(frozen=True)
class RunAggregate:
    """Mean and confidence half-width over repeated runs of one metric."""

    metric: str
    values: tuple[float, ...]
    mean: float
    half_width: float
    n_runs: int
    confidence: float


def logloss(y: np.ndarray, p: np.ndarray, eps: float = 1e-15) -> float:
    """Negative mean log-likelihood with probabilities clipped to [eps, 1-eps]."""
    y = np.asarray(y, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if len(y) != len(p):
        raise MetricError(f"length mismatch: {len(y)} labels vs {len(p)} probabilities")
    if len(y) == 0:
        raise MetricError("logloss of empty input is undefined")
    if not 0.0 < eps < 0.5:
        raise MetricError(f"eps must be in (0, 0.5), got {eps}")
    q = np.clip(p, eps, 1.0 - eps)
    return float(-np.mean(y * np.log(q) + (1.0 - y) * np.log1p(-q)))


def auroc(y: np.ndarray, scores: np.ndarray) -> float:
    """Probability a random positive outscores a random negative, ties as 1/2.

    Rank (Mann-Whitney) computation with midranks for ties; O(n log n).
    Raises MetricError when only one class is present.
    """
    y = np.asarray(y, dtype=np.float64)
    s = np.asarray(scores, dtype=np.float64)
    if len(y) != len(s):
        raise MetricError(f"length mismatch: {len(y)} labels vs {len(s)} scores")
    n_pos = int(np.sum(y == 1.0))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUROC undefined: need at least one positive and one negative")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    ranks = np.empty(len(s), dtype=np.float64)
    # midranks: equal scores share the average of their 1-based rank range
    boundaries = np.flatnonzero(np.diff(sorted_s) != 0) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [len(s)]))
    for a, b in zip(starts, ends):
        ranks[order[a:b]] = 0.5 * (a + 1 + b)
    rank_sum_pos = float(ranks[y == 1.0].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def evaluate(y: np.ndarray, p: np.ndarray) -> EvalResult:
    return EvalResult(logloss=logloss(y, p), auroc=auroc(y, p), n_rows=len(np.asarray(y)))


def aggregate_runs(values: list[float] | np.ndarray, confidence: float = 0.95, metric: str = "") -> RunAggregate:
    """Mean +/- z * s / sqrt(n) over run values (normal-approximation interval).

    ``s`` is the sample standard deviation; z is the two-sided normal quantile
    for the requested confidence (1.959964 at 95%).
    """
    vals = [float(v) for v in values]
    if len(vals) < 2:
        raise MetricError(f"need at least 2 run values to aggregate, got {len(vals)}")
    if not 0.0 < confidence < 1.0:
        raise MetricError(f"confidence must be in (0, 1), got {confidence}")
    n = len(vals)
    mean = math.fsum(vals) / n
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    return RunAggregate(
        metric=metric,
        values=tuple(vals),
        mean=mean,
        half_width=z * math.sqrt(var) / math.sqrt(n),
        n_runs=n,
        confidence=confidence,
    )
