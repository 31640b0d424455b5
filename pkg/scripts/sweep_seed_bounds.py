#!/usr/bin/env python3
"""Sweep the seed-size bounds at the optimal epsilon and write them to CSV."""
import argparse
import os
import sys

import pandas as pd

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from backend.app.verify import eq7_nonempty, table1_row  # noqa: E402


def log(msg):
    print(f"{msg}", flush=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-a", type=int, default=5)
    parser.add_argument("--max-x", type=int, default=64)
    parser.add_argument("-o", "--output", default="seed_bounds.csv")
    args = parser.parse_args()

    log("=" * 60)
    log("📐 SEED BOUND SWEEP")
    log("=" * 60)

    rows = []
    for a in range(2, args.max_a + 1):
        for x in range(a + 1, args.max_x + 1):
            row = table1_row(x, a)
            row["variance_interval_nonempty"] = eq7_nonempty(x, a)
            rows.append(row)
        log(f"   ✅ |A|={a}: {args.max_x - a} rows")

    frame = pd.DataFrame(rows)
    frame.to_csv(args.output, index=False)
    log(f"\n💾 Saved {len(frame):,} rows to {args.output}")
    log(frame["strongest"].value_counts().to_string())


if __name__ == "__main__":
    main()
