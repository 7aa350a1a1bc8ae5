#!/usr/bin/env python3
"""Training cost vs validation AUROC on a synthetic CTR clone.

The hourly rate is an input; the default approximates a 16-vCPU cloud
instance and exists purely to give the cost axis a scale.
"""

import argparse
from pathlib import Path

from ctrboost.bench import ExperimentSpec, emit_report, track_cost_curve
from ctrboost.encode import EncoderSpec
from ctrboost.gbdt import GBDTConfig
from ctrboost.synthetic import ctr_clone


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=100_000)
    parser.add_argument("--trees", type=int, default=200)
    parser.add_argument("--checkpoint-every", type=int, default=10)
    parser.add_argument("--rate-usd-per-hour", type=float, default=0.616)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", type=Path, default=Path("reports"))
    args = parser.parse_args()

    ds = ctr_clone(n_rows=args.rows, seed=args.seed)
    spec = ExperimentSpec(
        encoder=EncoderSpec(mode="native_passthrough"),
        gbdt=GBDTConfig(n_trees=args.trees, early_stopping_rounds=30),
        base_seed=args.seed,
        n_repeats=1,
    )
    report = track_cost_curve(
        spec, checkpoint_every=args.checkpoint_every, hourly_rate_usd=args.rate_usd_per_hour, dataset=ds
    )

    print(f"{'iter':>6} {'seconds':>9} {'usd':>10} {'auroc':>8}")
    for p in report["points"]:
        print(f"{p['iteration']:>6} {p['wall_seconds']:>9.2f} {p['cost_usd']:>10.6f} {p['valid_auroc']:>8.4f}")

    args.out_dir.mkdir(parents=True, exist_ok=True)
    emit_report(report, "json", args.out_dir / "cost_curve.json")
    emit_report(report, "csv", args.out_dir / "cost_curve.csv")
    print(f"reports written to {args.out_dir}/cost_curve.{{json,csv}}")


if __name__ == "__main__":
    main()
