"""Synthetic dataset generators for benchmarks and qualitative experiments.

These produce CTR-shaped data with controllable hazards: a high-cardinality
id column whose training statistics invite label leakage, an interaction the
id column only expresses jointly with a context column, and a drifting
stream whose category-to-label mapping flips mid-way.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, from_arrays
from .gbdt.loss import sigmoid


def _cat_column(codes: np.ndarray, prefix: str, cardinality: int) -> tuple[np.ndarray, list[str]]:
    return codes.astype(np.int32), [f"{prefix}{i}" for i in range(cardinality)]


def leakage_hazard(
    n_rows: int = 12000,
    n_ids: int = 1000,
    n_signal: int = 4,
    seed: int = 0,
    signal_logits: tuple[float, ...] = (-1.1, -0.4, 0.4, 1.1),
    interaction_logit: float = 1.6,
    context_logit: float = 0.6,
) -> Dataset:
    """High-cardinality id column with an interaction only native splits can use.

    The label depends on a low-cardinality ``signal`` column (main effect), a
    binary ``context`` column (small main effect), and on whether the id's
    hidden group matches the context (interaction). The id's *marginal*
    target mean carries almost no information, so any target-encoded summary
    of it is noise at best; plain TE additionally leaks each training row's
    own label into its value, while native categorical splits can recover the
    id group inside each context branch.
    """
    rng = np.random.default_rng(seed)
    signal = rng.integers(0, n_signal, n_rows)
    uid = rng.integers(0, n_ids, n_rows)
    context = rng.integers(0, 2, n_rows)
    uid_group = rng.integers(0, 2, n_ids)
    logits = (
        np.asarray(signal_logits)[signal]
        + context_logit * np.where(context == 1, 1.0, -1.0)
        + interaction_logit * np.where(uid_group[uid] == context, 1.0, -1.0)
    )
    y = (rng.random(n_rows) < sigmoid(logits)).astype(np.float64)
    return from_arrays(
        categorical={
            "signal": _cat_column(signal, "s", n_signal),
            "context": _cat_column(context, "c", 2),
            "uid": _cat_column(uid, "u", n_ids),
        },
        target=y,
        target_name="click",
    )


def separable(n_rows: int = 100, seed: int = 0) -> Dataset:
    """Linearly separable toy set: one numeric feature, threshold label."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n_rows)
    while len(np.unique(x > 0.0)) < 2:  # ensure both classes exist
        x = rng.normal(size=n_rows)
    return from_arrays(numerical={"x": x}, target=(x > 0.0).astype(np.float64))


def xor_pattern(reps: tuple[int, int, int, int] = (2, 1, 1, 1)) -> Dataset:
    """XOR of two binary numeric features with per-combination replication.

    Replication counts break the exact gradient symmetry of the 4-row XOR,
    which no gain-positive split finder can enter; the label function itself
    is still pure XOR.
    """
    combos = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    x1, x2, y = [], [], []
    for (a, b), r in zip(combos, reps):
        x1 += [a] * r
        x2 += [b] * r
        y += [float(int(a) ^ int(b))] * r
    return from_arrays(numerical={"x1": x1, "x2": x2}, target=y)


def random_instance(
    n_rows: int,
    n_num: int = 2,
    n_cat: int = 2,
    max_cardinality: int = 8,
    seed: int = 0,
) -> Dataset:
    """Random mixed-type dataset with a noisy linear-logit label."""
    rng = np.random.default_rng(seed)
    numerical = {f"n{i}": rng.normal(size=n_rows) for i in range(n_num)}
    categorical = {}
    logits = np.zeros(n_rows)
    for i, vals in enumerate(numerical.values()):
        logits += rng.normal() * vals
    for i in range(n_cat):
        card = int(rng.integers(2, max_cardinality + 1))
        codes = rng.integers(0, card, n_rows)
        categorical[f"c{i}"] = _cat_column(codes, f"c{i}_", card)
        logits += rng.normal(size=card)[codes]
    y = (rng.random(n_rows) < sigmoid(logits)).astype(np.float64)
    if y.min() == y.max():  # degenerate draw; flip one row
        y = y.copy()
        y[0] = 1.0 - y[0]
    return from_arrays(categorical=categorical, numerical=numerical, target=y)


def drift_stream(
    n_rows: int = 12000,
    n_cats: int = 12,
    flip_at: float = 0.5,
    drift: bool = True,
    seed: int = 0,
    spread: float = 2.0,
) -> Dataset:
    """Time-ordered stream whose category logits flip sign at ``flip_at``.

    With drift=False the mapping is stationary. The ``event_time`` column is
    strictly increasing so window slicing is unambiguous.
    """
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, n_cats, n_rows)
    base_logits = np.linspace(-spread, spread, n_cats)
    t = np.arange(n_rows, dtype=np.float64)
    logits = base_logits[codes]
    if drift:
        flipped = t >= flip_at * n_rows
        logits = np.where(flipped, -logits, logits)
    y = (rng.random(n_rows) < sigmoid(logits)).astype(np.float64)
    return from_arrays(
        categorical={"segment": _cat_column(codes, "seg", n_cats)},
        numerical={"event_time": t},
        target=y,
        target_name="click",
    )


def ctr_clone(
    n_rows: int = 300_000,
    n_cat: int = 10,
    cardinalities: tuple[int, ...] | None = None,
    seed: int = 0,
) -> Dataset:
    """Frappe-scale clone: many categorical columns of mixed cardinality."""
    rng = np.random.default_rng(seed)
    if cardinalities is None:
        cardinalities = tuple(int(c) for c in np.geomspace(4, 4000, n_cat).round())
    categorical = {}
    logits = np.full(n_rows, -1.0)
    for i, card in enumerate(cardinalities):
        codes = rng.integers(0, card, n_rows)
        categorical[f"f{i}"] = _cat_column(codes, f"f{i}_", card)
        effect = rng.normal(scale=0.6, size=card)
        logits += effect[codes]
    y = (rng.random(n_rows) < sigmoid(logits)).astype(np.float64)
    return from_arrays(categorical=categorical, target=y, target_name="click")
