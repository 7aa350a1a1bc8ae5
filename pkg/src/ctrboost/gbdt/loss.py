"""Binary logistic loss: sigmoid, gradients, hessians, base score."""

from __future__ import annotations

import numpy as np

RAW_CLIP = 40.0  # raw scores saturate here; sigmoid(40) rounds to 1.0 without NaN risk
PROB_CLIP = 1e-6  # base-rate clip when the training target is single-class


def sigmoid(raw: np.ndarray | float) -> np.ndarray | float:
    clipped = np.clip(raw, -RAW_CLIP, RAW_CLIP)
    return 1.0 / (1.0 + np.exp(-clipped))


def compute_grad_hess(y: np.ndarray, raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of logloss w.r.t. the raw score.

    p = sigmoid(raw); g = p - y; h = p * (1 - p).
    """
    y = np.asarray(y, dtype=np.float64)
    raw = np.asarray(raw, dtype=np.float64)
    if y.shape != raw.shape:
        raise ValueError(f"shape mismatch: y {y.shape} vs raw {raw.shape}")
    p = sigmoid(raw)
    return p - y, p * (1.0 - p)


def base_score(y: np.ndarray) -> float:
    """Log-odds of the training prior, clipped away from 0 and 1."""
    rate = float(np.mean(y))
    clipped = min(max(rate, PROB_CLIP), 1.0 - PROB_CLIP)
    return float(np.log(clipped / (1.0 - clipped)))
