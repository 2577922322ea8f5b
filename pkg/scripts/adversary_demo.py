#!/usr/bin/env python3
"""Query lower-bound demonstration: budgeted solvers never find a witness.

Plays the bundled solver fixtures against an adversarial session and counts
refutations; optionally registers a weak-principle tree family first, so the
run also demonstrates that the weak principle gets forced while the strong
one never does.
"""

import argparse
import random
import time

from finprin import adversary, catalog
from finprin.adversary import SOLVERS, embedding_certificate, new_session, play
from finprin.dtrees import build_C, random_tree_family
from finprin.partial import verifies_witness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--principle", default="PHP")
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--budget", type=int, default=20)
    ap.add_argument("--plays", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--with-wphp-family", action="store_true",
                    help="register a random WPHP tree family before each play")
    ap.add_argument("--m", type=int, default=16)
    ap.add_argument("--b0", type=int, default=4)
    args = ap.parse_args()

    entry = catalog.builtin(args.principle)
    wphp = catalog.builtin("WPHP")
    rng = random.Random(args.seed)
    fixtures = list(SOLVERS.items())

    t0 = time.time()
    refuted = 0
    for k in range(args.plays):
        session = new_session(entry, n=args.n, budget=args.budget)
        receipt = None
        if args.with_wphp_family:
            fam = random_tree_family(
                wphp.sentence.language, args.m, args.b0,
                entry.sentence.language, args.n, seed=k,
            )
            receipt = adversary.register_tree_family(
                session, fam, wphp.sentence, args.b0, lambda m: m + 1
            )
        name, solver = fixtures[k % len(fixtures)]
        out = play(session, solver, args.budget, rng)
        assert out.refuted
        assert verifies_witness(session.structure(), entry.sentence) is None
        embedding_certificate(session)
        if receipt is not None:
            assert verifies_witness(build_C(receipt.family, session.oracle),
                                    wphp.sentence) is not None
        refuted += 1
    print(f"{refuted}/{args.plays} plays refuted in {time.time() - t0:.1f}s "
          f"({args.principle}, n={args.n}, budget={args.budget})")


if __name__ == "__main__":
    main()
