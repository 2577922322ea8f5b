#!/usr/bin/env python3
"""Exercise the core extension at the standard demo parameters.

Runs the procedure against random tree families on the inverse-order model,
printing one JSON line per iteration (the auditing trace of the averaging
step) and a summary.
"""

import argparse
import json
import time

from finprin import catalog, density
from finprin.dtrees import build_C, random_tree_family
from finprin.encoding import empty_oracle
from finprin.partial import verifies_witness
from finprin.syntax import formula_size


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--m", type=int, default=16)
    ap.add_argument("--b0", type=int, default=4)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    hop = catalog.builtin("HOP")
    wphp = catalog.builtin("WPHP")
    ctx = density.new_context(hop.model, hop.sentence, args.n)
    p = empty_oracle(hop.sentence.language, args.n)
    bound = args.b0 * formula_size(wphp.sentence)

    t0 = time.time()
    sizes = []
    for run in range(args.runs):
        fam = random_tree_family(
            wphp.sentence.language, args.m, args.b0,
            hop.sentence.language, args.n, args.seed + run,
        )
        res = density.core_extend(ctx, p, fam, args.b0, wphp.sentence, lambda m: m + 1)
        assert verifies_witness(build_C(fam, res.oracle), wphp.sentence) is not None
        assert res.oracle.size() <= bound
        sizes.append(res.oracle.size())
        for row in res.rounds:
            print(json.dumps({"run": run, **row}))
    print(json.dumps({
        "runs": args.runs,
        "verified": args.runs,
        "size_bound": bound,
        "max_extension": max(sizes),
        "seconds": round(time.time() - t0, 2),
    }))


if __name__ == "__main__":
    main()
