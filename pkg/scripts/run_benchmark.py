#!/usr/bin/env python3
"""Run the synthetic multilingual benchmark and print median PER tables.

Example:
    python3 scripts/run_benchmark.py --seeds 5 --out reports/bench.jsonl
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from phonoam.benchmark import (  # noqa: E402
    HEAD_KINDS,
    BenchmarkConfig,
    median_per,
    run_seeds,
    write_report,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0, help="first benchmark seed")
    ap.add_argument("--seeds", type=int, default=5, help="number of seeds")
    ap.add_argument("--heads", nargs="+", default=list(HEAD_KINDS), choices=HEAD_KINDS)
    ap.add_argument(
        "--conditions", nargs="+", default=["zero_shot", "few_shot"],
        choices=["zero_shot", "few_shot", "multilingual"],
    )
    ap.add_argument("--out", default=None, help="optional JSONL report path")
    args = ap.parse_args()

    records = run_seeds(
        BenchmarkConfig(),
        range(args.seed, args.seed + args.seeds),
        heads=tuple(args.heads),
        conditions=tuple(args.conditions),
    )
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        write_report(records, args.out)
        print(f"wrote {len(records)} records to {args.out}")

    print(f"\nmedian over {args.seeds} seed(s)")
    print(f"{'head':<12}{'condition':<14}{'PER':>8}{'seen':>8}{'unseen':>8}")
    for head in args.heads:
        for cond in args.conditions:
            per = median_per(records, head, cond)
            seen = median_per(records, head, cond, key="seen_per")
            unseen = median_per(records, head, cond, key="unseen_per")
            print(f"{head:<12}{cond:<14}{per:>8.3f}{seen:>8.3f}{unseen:>8.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
