#!/usr/bin/env python3
"""Timing run: 10 repeats on a 300k-row, 10-column categorical clone."""

import argparse
import time
from pathlib import Path

from ctrboost.bench import ExperimentSpec, emit_report, run_experiment
from ctrboost.encode import EncoderSpec
from ctrboost.gbdt import GBDTConfig
from ctrboost.synthetic import ctr_clone


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=300_000)
    parser.add_argument("--repeats", type=int, default=10)
    parser.add_argument("--trees", type=int, default=200)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", type=Path, default=Path("reports"))
    args = parser.parse_args()

    ds = ctr_clone(n_rows=args.rows, n_cat=10, seed=args.seed)
    spec = ExperimentSpec(
        encoder=EncoderSpec(mode="native_passthrough"),
        gbdt=GBDTConfig(n_trees=args.trees, early_stopping_rounds=20),
        n_repeats=args.repeats,
        base_seed=args.seed,
    )
    t0 = time.perf_counter()
    report = run_experiment(spec, dataset=ds, threads=args.threads)
    minutes = (time.perf_counter() - t0) / 60.0
    agg = report["aggregates"]
    print(f"{args.repeats} repeats on {args.rows} rows: {minutes:.1f} minutes")
    print(f"auroc   {agg['auroc']['mean']:.4f} +/- {agg['auroc']['half_width']:.4f}")
    print(f"logloss {agg['logloss']['mean']:.4f} +/- {agg['logloss']['half_width']:.4f}")

    args.out_dir.mkdir(parents=True, exist_ok=True)
    emit_report(report, "json", args.out_dir / "benchmark_clone.json")
    print(f"report written to {args.out_dir}/benchmark_clone.json")


if __name__ == "__main__":
    main()
