#!/usr/bin/env python3
"""Reproduce the determinacy table for the whole catalog at small n.

Prints one TSV row per (principle, n) with the exact d(n), the total size
s_L(n), and the recorded closed form when one exists.
"""

import argparse
import time

from finprin import catalog
from finprin.determinacy import FeasibilityError, determinacy
from finprin.partial import s_L


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--cap", type=int, default=None)
    args = ap.parse_args()

    print("principle\tn\td(n)\ts_L(n)\trecorded\tseconds")
    for name in catalog.names():
        entry = catalog.builtin(name)
        for n in args.n:
            t0 = time.time()
            try:
                d = determinacy(entry.sentence, n, cap=args.cap)
            except FeasibilityError as err:
                print(f"{name}\t{n}\t-\t{s_L(entry.sentence.language, n)}\tcap: {err}\t-")
                continue
            recorded = ""
            if entry.determinacy_formula is not None:
                recorded = str(entry.determinacy_formula(n))
            elif entry.lower_bound is not None:
                recorded = f"> {entry.lower_bound(n)}"
            print(
                f"{name}\t{n}\t{d}\t{s_L(entry.sentence.language, n)}"
                f"\t{recorded}\t{time.time() - t0:.2f}"
            )


if __name__ == "__main__":
    main()
