"""Experiment harness: repeated train/eval runs, encoder ablation, cost-curve
tracking, staleness simulation, and machine-readable reports."""

from __future__ import annotations

import copy
import json
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .data import Dataset, SplitSpec, load_csv, split, subsample
from .encode import EncoderMode, EncoderSpec, apply as encoder_apply, encode_for_training, with_seed as encoder_with_seed
from .gbdt import CatMode, GBDTConfig, Model, predict, train, with_cat_mode, with_seed as gbdt_with_seed
from .metrics import MetricError, aggregate_runs, auroc, logloss

REPORT_SCHEMA_VERSION = 1

# report fields that legitimately vary between byte-identical reruns
VOLATILE_KEYS = ("created_utc", "train_seconds", "total_seconds", "wall_seconds", "cost_usd", "commit")


class BenchError(ValueError):
    """Raised for invalid experiment or staleness specifications."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce a repeated train/eval experiment.

    Repeat r uses seed ``base_seed + r`` for the split, the encoder, and the
    learner; the subsample (when any) is drawn once with ``base_seed``.
    """

    data_path: str | None = None
    schema_hint_path: str | None = None
    target: str | None = None
    delimiter: str = ","
    subsample_fraction: float = 1.0
    split: SplitSpec = field(default_factory=SplitSpec)
    encoder: EncoderSpec = field(default_factory=lambda: EncoderSpec(mode=EncoderMode.NATIVE_PASSTHROUGH))
    gbdt: GBDTConfig = field(default_factory=GBDTConfig)
    n_repeats: int = 10
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_repeats < 1:
            raise BenchError(f"n_repeats must be >= 1, got {self.n_repeats}")


@dataclass(frozen=True)
class CostCurvePoint:
    iteration: int
    wall_seconds: float
    cost_usd: float
    valid_auroc: float


@dataclass(frozen=True)
class StalenessSpec:
    """Windowed evaluation over a time-ordered stream.

    The stream is the dataset sorted by ``time_column``; windows hold equal
    event counts. Policy "never" trains once on the warmup windows, policy
    "every_window" retrains on all data seen so far before each window.
    """

    time_column: str
    n_windows: int
    warmup_windows: int = 1
    policies: tuple[str, ...] = ("never", "every_window")

    def __post_init__(self) -> None:
        if self.n_windows < 3:
            raise BenchError(f"need at least 3 windows, got {self.n_windows}")
        if not 1 <= self.warmup_windows < self.n_windows:
            raise BenchError(f"warmup_windows must be in [1, n_windows), got {self.warmup_windows}")
        unknown = set(self.policies) - {"never", "every_window"}
        if unknown:
            raise BenchError(f"unknown retrain policies {sorted(unknown)}")


def spec_to_dict(spec: ExperimentSpec) -> dict:
    out = asdict(spec)
    out["split"] = asdict(spec.split)
    out["encoder"] = {**asdict(spec.encoder), "mode": spec.encoder.mode.value}
    out["gbdt"] = {**asdict(spec.gbdt), "cat_mode": spec.gbdt.cat_mode.value}
    out["version"] = REPORT_SCHEMA_VERSION
    return out


def spec_from_dict(raw: dict, base_dir: str | Path | None = None) -> ExperimentSpec:
    raw = dict(raw)
    raw.pop("version", None)
    split_spec = SplitSpec(**raw.pop("split", {}))
    encoder_spec = EncoderSpec(**raw.pop("encoder", {}))
    gbdt_config = GBDTConfig(**raw.pop("gbdt", {}))
    if base_dir is not None:
        for key in ("data_path", "schema_hint_path"):
            if raw.get(key):
                p = Path(raw[key])
                if not p.is_absolute():
                    raw[key] = str(Path(base_dir) / p)
    return ExperimentSpec(split=split_spec, encoder=encoder_spec, gbdt=gbdt_config, **raw)


def load_spec_file(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    return spec_from_dict(json.loads(path.read_text(encoding="utf-8")), base_dir=path.parent)


def _git_commit() -> str | None:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5, check=False
        )
        return out.stdout.strip() or None
    except OSError:
        return None


def _provenance(ds: Dataset, threads: int) -> dict:
    from . import __version__ as package_version

    return {
        "package_version": package_version,
        "numpy_version": np.__version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "commit": _git_commit(),
        "ci_method": "normal-approximation z * s / sqrt(n)",
        "threads": threads,
        "data_fingerprint": {
            "n_rows": ds.n_rows,
            "columns": [(c.name, c.kind.value) for c in ds.schema],
        },
    }


def load_dataset(spec: ExperimentSpec) -> Dataset:
    if spec.data_path is None:
        raise BenchError("spec has no data_path; pass a dataset explicitly")
    ds = load_csv(spec.data_path, schema_hint=spec.schema_hint_path, target=spec.target, delimiter=spec.delimiter)
    if spec.subsample_fraction < 1.0:
        ds = subsample(ds, spec.subsample_fraction, seed=spec.base_seed)
    return ds


def _derived_cat_mode(mode: EncoderMode) -> CatMode:
    return CatMode.NATIVE if mode is EncoderMode.NATIVE_PASSTHROUGH else CatMode.ENCODED


def run_single(ds: Dataset, spec: ExperimentSpec, repeat: int) -> dict:
    """One seeded split -> encode -> train -> test evaluation."""
    seed = spec.base_seed + repeat
    tr, va, te = split(ds, replace(spec.split, seed=seed))
    enc_spec = encoder_with_seed(spec.encoder, seed)
    config = with_cat_mode(gbdt_with_seed(spec.gbdt, seed), _derived_cat_mode(enc_spec.mode))
    t0 = time.perf_counter()
    enc_train, encoder = encode_for_training(tr, enc_spec)
    enc_valid = encoder_apply(encoder, va)
    model = train(enc_train, enc_valid, config, encoder=encoder)
    train_seconds = time.perf_counter() - t0
    p_test = predict(model, te)
    p_valid = predict(model, va)
    return {
        "repeat": repeat,
        "seed": seed,
        "n_train": tr.n_rows,
        "n_valid": va.n_rows,
        "n_test": te.n_rows,
        "best_iteration": model.metadata["best_iteration"],
        "n_trees_kept": model.metadata["n_trees_kept"],
        "logloss": logloss(te.target, p_test),
        "auroc": auroc(te.target, p_test),
        "valid_logloss": logloss(va.target, p_valid),
        "valid_auroc": auroc(va.target, p_valid),
        "train_seconds": train_seconds,
    }


def _aggregate(repeats: list[dict], key: str) -> dict | None:
    values = [r[key] for r in repeats]
    if len(values) < 2:
        return None
    agg = aggregate_runs(values, metric=key)
    return {
        "mean": agg.mean,
        "half_width": agg.half_width,
        "n_runs": agg.n_runs,
        "confidence": agg.confidence,
        "values": list(agg.values),
    }


def run_experiment(spec: ExperimentSpec, dataset: Dataset | None = None, threads: int = 1) -> dict:
    """Repeated seeded runs aggregated into a machine-readable report."""
    ds = dataset if dataset is not None else load_dataset(spec)
    t0 = time.perf_counter()

    def one(r: int) -> dict:
        try:
            return run_single(ds, spec, r)
        except Exception as exc:
            raise BenchError(f"repeat {r} (seed {spec.base_seed + r}) failed: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            repeats = list(pool.map(one, range(spec.n_repeats)))
    else:
        repeats = [one(r) for r in range(spec.n_repeats)]
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "experiment",
        "spec": spec_to_dict(spec),
        "provenance": _provenance(ds, threads),
        "repeats": repeats,
        "aggregates": {
            "logloss": _aggregate(repeats, "logloss"),
            "auroc": _aggregate(repeats, "auroc"),
        },
        "timing": {"total_seconds": time.perf_counter() - t0},
    }
    return report


def run_ablation(
    spec: ExperimentSpec,
    modes: list[EncoderMode | str],
    dataset: Dataset | None = None,
    threads: int = 1,
) -> dict:
    """run_experiment once per encoder mode under identical per-repeat seeds."""
    if len(modes) < 2:
        raise BenchError(f"ablation needs at least 2 encoder modes, got {len(modes)}")
    modes = [EncoderMode(m) for m in modes]
    ds = dataset if dataset is not None else load_dataset(spec)
    rows = []
    full_reports = {}
    for mode in modes:
        mode_spec = replace(spec, encoder=replace(spec.encoder, mode=mode))
        rep = run_experiment(mode_spec, dataset=ds, threads=threads)
        full_reports[mode.value] = rep
        agg = rep["aggregates"]
        single = rep["repeats"][0]
        rows.append(
            {
                "mode": mode.value,
                "logloss_mean": agg["logloss"]["mean"] if agg["logloss"] else single["logloss"],
                "logloss_hw": agg["logloss"]["half_width"] if agg["logloss"] else None,
                "auroc_mean": agg["auroc"]["mean"] if agg["auroc"] else single["auroc"],
                "auroc_hw": agg["auroc"]["half_width"] if agg["auroc"] else None,
            }
        )
    best_logloss = min(r["logloss_mean"] for r in rows)
    best_auroc = max(r["auroc_mean"] for r in rows)
    for r in rows:
        r["best_logloss"] = r["logloss_mean"] == best_logloss
        r["best_auroc"] = r["auroc_mean"] == best_auroc
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "ablation",
        "spec": spec_to_dict(spec),
        "modes": [m.value for m in modes],
        "provenance": _provenance(ds, threads),
        "rows": rows,
        "reports": full_reports,
    }


def track_cost_curve(
    spec: ExperimentSpec,
    checkpoint_every: int = 10,
    hourly_rate_usd: float = 0.616,
    dataset: Dataset | None = None,
) -> dict:
    """Train once (repeat-0 seed) recording wall time, cost and valid AUROC.

    The hourly rate is a config input; the default is illustrative, not a
    quoted price. A terminal point is appended for the final (possibly
    early-stop-truncated) model.
    """
    if checkpoint_every < 1:
        raise BenchError(f"checkpoint_every must be >= 1, got {checkpoint_every}")
    ds = dataset if dataset is not None else load_dataset(spec)
    seed = spec.base_seed
    tr, va, te = split(ds, replace(spec.split, seed=seed))
    enc_spec = encoder_with_seed(spec.encoder, seed)
    config = with_cat_mode(gbdt_with_seed(spec.gbdt, seed), _derived_cat_mode(enc_spec.mode))
    enc_train, encoder = encode_for_training(tr, enc_spec)
    enc_valid = encoder_apply(encoder, va)
    y_valid = va.target

    points: list[CostCurvePoint] = []
    t0 = time.perf_counter()

    def checkpoint(iteration: int, raw_train: np.ndarray, raw_valid: np.ndarray | None) -> None:
        if iteration % checkpoint_every != 0:
            return
        wall = time.perf_counter() - t0
        score = auroc(y_valid, raw_valid)
        points.append(CostCurvePoint(iteration, wall, wall / 3600.0 * hourly_rate_usd, score))

    model = train(enc_train, enc_valid, config, encoder=encoder, callback=checkpoint)
    wall = time.perf_counter() - t0
    final_auroc = auroc(y_valid, predict(model, va))
    final_iteration = model.metadata["n_trees_trained"]
    if points and points[-1].iteration == final_iteration:
        points.pop()
    points.append(CostCurvePoint(final_iteration, wall, wall / 3600.0 * hourly_rate_usd, final_auroc))

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "cost_curve",
        "spec": spec_to_dict(spec),
        "provenance": _provenance(ds, threads=1),
        "checkpoint_every": checkpoint_every,
        "hourly_rate_usd": hourly_rate_usd,
        "best_iteration": model.metadata["best_iteration"],
        "points": [asdict(p) for p in points],
    }


def simulate_staleness(sspec: StalenessSpec, spec: ExperimentSpec, dataset: Dataset | None = None) -> dict:
    """Rolling per-window metrics for the configured retrain policies.

    Training inside the simulation runs without early stopping (there is no
    natural holdout in the stream); windows whose labels are single-class get
    auroc=None and the series continues.
    """
    ds = dataset if dataset is not None else load_dataset(spec)
    if sspec.time_column not in ds.num_values:
        raise BenchError(f"time column {sspec.time_column!r} is not a numerical column of the dataset")
    order = np.argsort(ds.num_values[sspec.time_column], kind="mergesort")
    stream = ds.take(order)
    windows = np.array_split(np.arange(stream.n_rows), sspec.n_windows)
    if min(len(w) for w in windows) == 0:
        raise BenchError(f"{sspec.n_windows} windows over {stream.n_rows} rows leaves an empty window")

    enc_spec = encoder_with_seed(spec.encoder, spec.base_seed)
    config = replace(
        with_cat_mode(gbdt_with_seed(spec.gbdt, spec.base_seed), _derived_cat_mode(enc_spec.mode)),
        early_stopping_rounds=0,
    )

    def fit(upto_window: int) -> Model:
        rows = np.concatenate(windows[:upto_window])
        train_slice = stream.take(rows)
        enc_train, encoder = encode_for_training(train_slice, enc_spec)
        return train(enc_train, None, config, encoder=encoder)

    series: dict[str, list[dict]] = {}
    for policy in sspec.policies:
        model = fit(sspec.warmup_windows) if policy == "never" else None
        rows_out = []
        for w in range(sspec.warmup_windows, sspec.n_windows):
            if policy == "every_window":
                model = fit(w)
            window_ds = stream.take(windows[w])
            p = predict(model, window_ds)
            try:
                window_auroc = auroc(window_ds.target, p)
            except MetricError:
                window_auroc = None
            rows_out.append(
                {
                    "window": w,
                    "n_rows": window_ds.n_rows,
                    "logloss": logloss(window_ds.target, p),
                    "auroc": window_auroc,
                }
            )
        series[policy] = rows_out

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "staleness",
        "spec": spec_to_dict(spec),
        "staleness": {
            "time_column": sspec.time_column,
            "n_windows": sspec.n_windows,
            "warmup_windows": sspec.warmup_windows,
            "policies": list(sspec.policies),
        },
        "provenance": _provenance(ds, threads=1),
        "series": series,
    }


def strip_volatile(report: dict) -> dict:
    """Deep copy with timing/timestamp fields removed (determinism comparisons)."""

    def scrub(obj):
        if isinstance(obj, dict):
            return {k: scrub(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
        if isinstance(obj, list):
            return [scrub(v) for v in obj]
        return obj

    return scrub(copy.deepcopy(report))


def _csv_escape(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if any(ch in text for ch in ",\"\n"):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _rows_to_csv(header: list[str], rows: list[dict]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_escape(row.get(col)) for col in header))
    return "\n".join(lines) + "\n"


def report_to_csv(report: dict) -> str:
    """Tabular view of a report; the JSON form keeps the full provenance."""
    kind = report.get("kind")
    if kind == "experiment":
        header = ["repeat", "seed", "logloss", "auroc", "valid_logloss", "valid_auroc", "best_iteration", "n_trees_kept"]
        rows = [dict(r) for r in report["repeats"]]
        for metric in ("logloss", "auroc"):
            agg = report["aggregates"].get(metric)
            if agg:
                rows.append({"repeat": f"{metric}_mean", metric: agg["mean"]})
                rows.append({"repeat": f"{metric}_half_width", metric: agg["half_width"]})
        return _rows_to_csv(header, rows)
    if kind == "ablation":
        header = ["mode", "logloss_mean", "logloss_hw", "auroc_mean", "auroc_hw", "best_logloss", "best_auroc"]
        return _rows_to_csv(header, report["rows"])
    if kind == "cost_curve":
        header = ["iteration", "wall_seconds", "cost_usd", "valid_auroc"]
        return _rows_to_csv(header, report["points"])
    if kind == "staleness":
        header = ["policy", "window", "n_rows", "logloss", "auroc"]
        rows = [
            {"policy": policy, **row}
            for policy, series in report["series"].items()
            for row in series
        ]
        return _rows_to_csv(header, rows)
    raise BenchError(f"cannot render CSV for report kind {kind!r}")


def emit_report(report: dict, fmt: str, path: str | Path) -> list[Path]:
    """Write the report as JSON or CSV; returns the written paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    elif fmt == "csv":
        path.write_text(report_to_csv(report), encoding="utf-8")
    else:
        raise BenchError(f"unknown report format {fmt!r} (expected json or csv)")
    return [path]
