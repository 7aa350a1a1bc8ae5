"""Command-line interface: train, predict, evaluate, experiment, ablate,
cost-curve, staleness, report."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import (
    BenchError,
    ExperimentSpec,
    StalenessSpec,
    emit_report,
    load_spec_file,
    run_ablation,
    run_experiment,
    simulate_staleness,
    track_cost_curve,
)
from .data import load_csv, split
from .encode import EncoderMode, EncoderSpec, apply as encoder_apply, encode_for_training, with_seed as encoder_with_seed
from .gbdt import GBDTConfig, load as load_model, predict, save as save_model, with_cat_mode, with_seed as gbdt_with_seed
from .metrics import auroc, logloss


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="input CSV file (header row required)")
    p.add_argument("--schema", default=None, help="schema hint file (column = kind lines)")
    p.add_argument("--target", default=None, help="target column name (alternative to a hint file entry)")
    p.add_argument("--delimiter", default=",", help="CSV delimiter (default comma)")


def _load(args: argparse.Namespace):
    return load_csv(args.data, schema_hint=args.schema, target=args.target, delimiter=args.delimiter)


def _gbdt_config(args: argparse.Namespace) -> GBDTConfig:
    if args.config:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        return GBDTConfig(**raw)
    return GBDTConfig()


def cmd_train(args: argparse.Namespace) -> int:
    ds = _load(args)
    seed = args.seed
    enc_spec = encoder_with_seed(EncoderSpec(mode=EncoderMode(args.encoder)), seed)
    cat_mode = "native" if enc_spec.mode is EncoderMode.NATIVE_PASSTHROUGH else "encoded"
    config = with_cat_mode(gbdt_with_seed(_gbdt_config(args), seed), cat_mode)
    if config.early_stopping_rounds > 0:
        # hold out a seeded valid split for early stopping
        tr, va, _ = split(ds, replace(ExperimentSpec().split, seed=seed))
    else:
        tr, va = ds, None
    enc_train, encoder = encode_for_training(tr, enc_spec)
    enc_valid = encoder_apply(encoder, va) if va is not None else None
    from .gbdt import train as gbdt_train

    model = gbdt_train(enc_train, enc_valid, config, encoder=encoder)
    save_model(model, args.out)
    print(
        json.dumps(
            {
                "model": str(args.out),
                "n_trees": model.n_trees,
                "best_iteration": model.metadata["best_iteration"],
                "train_rows": tr.n_rows,
            }
        )
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    ds = _load(args)
    probs = predict(model, ds)
    out = Path(args.out)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_id", "probability"])
        for i, p in enumerate(probs):
            writer.writerow([i, repr(float(p))])
    print(json.dumps({"predictions": str(out), "n_rows": len(probs)}))
    return 0


def _read_predictions(path: str, n_rows: int) -> np.ndarray:
    probs = np.full(n_rows, np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip().lower() for h in header[:2]] != ["row_id", "probability"]:
            raise BenchError(f"{path}: expected header 'row_id,probability', got {header}")
        for row in reader:
            idx = int(row[0])
            if not 0 <= idx < n_rows:
                raise BenchError(f"{path}: row_id {idx} out of range for {n_rows} data rows")
            probs[idx] = float(row[1])
    if np.isnan(probs).any():
        missing = int(np.isnan(probs).sum())
        raise BenchError(f"{path}: {missing} rows have no prediction")
    return probs


def cmd_evaluate(args: argparse.Namespace) -> int:
    ds = _load(args)
    if (args.model is None) == (args.predictions is None):
        raise BenchError("evaluate needs exactly one of --model or --predictions")
    if args.model:
        probs = predict(load_model(args.model), ds)
    else:
        probs = _read_predictions(args.predictions, ds.n_rows)
    result = {"logloss": logloss(ds.target, probs), "auroc": auroc(ds.target, probs), "n_rows": ds.n_rows}
    text = json.dumps(result, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    spec = load_spec_file(args.config)
    if args.seed is not None:
        spec = replace(spec, base_seed=args.seed)
    if args.repeats is not None:
        spec = replace(spec, n_repeats=args.repeats)
    if getattr(args, "encoder", None):
        spec = replace(spec, encoder=replace(spec.encoder, mode=EncoderMode(args.encoder)))
    return spec


def _emit(report: dict, args: argparse.Namespace) -> int:
    if args.out:
        paths = emit_report(report, args.format, args.out)
        print(json.dumps({"report": [str(p) for p in paths], "kind": report["kind"]}))
    else:
        print(json.dumps(report, indent=2))
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    report = run_experiment(_spec_from_args(args), threads=args.threads)
    return _emit(report, args)


def cmd_ablate(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    report = run_ablation(spec, modes=args.modes, threads=args.threads)
    return _emit(report, args)


def cmd_cost_curve(args: argparse.Namespace) -> int:
    report = track_cost_curve(
        _spec_from_args(args),
        checkpoint_every=args.checkpoint_every,
        hourly_rate_usd=args.rate_usd_per_hour,
    )
    return _emit(report, args)


def cmd_staleness(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    sspec = StalenessSpec(
        time_column=args.time_column,
        n_windows=args.windows,
        warmup_windows=args.warmup,
        policies=tuple(args.policy),
    )
    report = simulate_staleness(sspec, spec)
    return _emit(report, args)


def cmd_report(args: argparse.Namespace) -> int:
    report = json.loads(Path(args.input).read_text(encoding="utf-8"))
    paths = emit_report(report, args.format, args.out)
    print(json.dumps({"report": [str(p) for p in paths], "kind": report.get("kind")}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctrboost", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a seeded train/valid split of a CSV")
    _add_data_args(p)
    p.add_argument("--config", default=None, help="GBDT config JSON file (defaults otherwise)")
    p.add_argument("--encoder", default="native_passthrough", choices=[m.value for m in EncoderMode])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    _add_data_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="predictions CSV (row_id,probability)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="logloss/AUROC of a model or an external prediction file")
    _add_data_args(p)
    p.add_argument("--model", default=None)
    p.add_argument("--predictions", default=None, help="row_id,probability CSV to score instead of a model")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    def add_spec_args(p: argparse.ArgumentParser, with_encoder: bool = True) -> None:
        p.add_argument("--config", required=True, help="experiment spec JSON file")
        p.add_argument("--seed", type=int, default=None, help="override the spec base seed")
        p.add_argument("--repeats", type=int, default=None, help="override the spec repeat count")
        if with_encoder:
            p.add_argument("--encoder", default=None, choices=[m.value for m in EncoderMode])
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None)
        p.add_argument("--format", default="json", choices=["json", "csv"])

    p = sub.add_parser("experiment", help="repeated train/eval runs from a spec file")
    add_spec_args(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("ablate", help="encoder ablation with paired seeds")
    add_spec_args(p, with_encoder=False)
    p.add_argument("--modes", nargs="+", default=["label", "target", "native_passthrough"],
                   choices=[m.value for m in EncoderMode])
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("cost-curve", help="wall-clock/cost vs valid AUROC during one training run")
    add_spec_args(p)
    p.add_argument("--checkpoint-every", type=int, default=10)
    p.add_argument("--rate-usd-per-hour", type=float, default=0.616,
                   help="illustrative instance rate used for the cost axis")
    p.set_defaults(func=cmd_cost_curve)

    p = sub.add_parser("staleness", help="windowed retrain-policy comparison over a time-ordered stream")
    add_spec_args(p)
    p.add_argument("--time-column", required=True)
    p.add_argument("--windows", type=int, required=True)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--policy", nargs="+", default=["never", "every_window"], choices=["never", "every_window"])
    p.set_defaults(func=cmd_staleness)

    p = sub.add_parser("report", help="convert an emitted JSON report to another format")
    p.add_argument("--input", required=True, help="report JSON file")
    p.add_argument("--format", default="csv", choices=["json", "csv"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
