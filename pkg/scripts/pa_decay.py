#!/usr/bin/env python3
"""Security distance of the affine family against i.i.d. flipped bits, n = 1..N."""
import argparse
import os
import sys
from fractions import Fraction

import pandas as pd

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from backend.app.errors import HashDesignError  # noqa: E402
from backend.app.hash_family import affine  # noqa: E402
from backend.app.models import rational_str  # noqa: E402
from backend.app.privacy import iid_extend, run_pa, symmetric_source  # noqa: E402


def log(msg):
    print(f"{msg}", flush=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--flip", default="1/4", help="bit flip probability")
    parser.add_argument("--max-n", type=int, default=4)
    parser.add_argument("-o", "--output", default="pa_decay.csv")
    args = parser.parse_args()

    flip = Fraction(args.flip)
    log(f"🔐 Privacy amplification decay, flip={flip}")
    base = symmetric_source(2, flip)
    rows = []
    for n in range(1, args.max_n + 1):
        f = affine(2, n)
        src = iid_extend(base, n).with_x_labels(f.x_labels)
        try:
            result = run_pa(src, f)
        except HashDesignError as e:
            log(f"   ❌ n={n}: {e}")
            break
        rows.append({
            "n": n,
            "distance": rational_str(result.security_distance),
            "distance_real": float(result.security_distance),
            "bound": result.theorem_bound,
            "h2": result.entropy_h2,
        })
        log(f"   ✅ n={n}: distance={float(result.security_distance):.6f} bound={result.theorem_bound:.6f}")

    pd.DataFrame(rows).to_csv(args.output, index=False)
    log(f"\n💾 Saved {len(rows)} rows to {args.output}")


if __name__ == "__main__":
    main()
