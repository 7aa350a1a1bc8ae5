#!/usr/bin/env python3
"""Convert a MovieLens download into the tag-interaction CTR CSV.

Observed (user, movie, tag) triples become positives; for each positive,
``--negatives`` variants with a uniformly resampled tag become negatives.
Works with any MovieLens release that ships ``tags.csv``
(ml-latest, ml-25m, ...); point --source at the extracted directory.

Output columns: user_id, movie_id, tag, click. Run the sanity benchmark with:

    CTRBOOST_MOVIELENS_CSV=movielens_ctr.csv pytest tests/test_acceptance.py -k movielens -s
"""

import argparse
import csv
import random
from pathlib import Path


def read_tag_rows(source: Path) -> list[tuple[str, str, str]]:
    tags_csv = source / "tags.csv"
    if not tags_csv.exists():
        raise SystemExit(f"{tags_csv} not found; extract a MovieLens archive that contains tags.csv")
    rows = []
    with tags_csv.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            tag = row["tag"].strip().lower()
            if tag:
                rows.append((row["userId"], row["movieId"], tag))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--source", type=Path, required=True, help="extracted MovieLens directory")
    parser.add_argument("--out", type=Path, default=Path("movielens_ctr.csv"))
    parser.add_argument("--negatives", type=int, default=2, help="negatives sampled per positive")
    parser.add_argument("--max-positives", type=int, default=0, help="subsample positives (0 = keep all)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    positives = read_tag_rows(args.source)
    rng.shuffle(positives)
    if args.max_positives and len(positives) > args.max_positives:
        positives = positives[: args.max_positives]

    observed = set(positives)
    tag_pool = sorted({t for _, _, t in observed})

    with args.out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "movie_id", "tag", "click"])
        n_neg = 0
        for user, movie, tag in positives:
            writer.writerow([user, movie, tag, 1])
            for _ in range(args.negatives):
                for _attempt in range(20):
                    candidate = rng.choice(tag_pool)
                    if (user, movie, candidate) not in observed:
                        writer.writerow([user, movie, candidate, 0])
                        n_neg += 1
                        break
    print(f"wrote {args.out}: {len(positives)} positives, {n_neg} negatives, {len(tag_pool)} distinct tags")


if __name__ == "__main__":
    main()
