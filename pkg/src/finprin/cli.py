"""Command-line surface: experiments, translations, and the solver protocol.

Exit codes: 0 success, 2 usage error, 3 hypothesis violation, 4 feasibility
cap exceeded.  FINPRIN_NODE_CAP overrides the determinacy search cap.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from finprin import adversary, catalog, density, reductions
from finprin.determinacy import FeasibilityError, determinacy, max_nonverifying, weakness_report
from finprin.density import HypothesisError
from finprin.dtrees import build_C, random_tree_family
from finprin.encoding import empty_oracle
from finprin.partial import (
    ContractError,
    eval3,
    s_L,
    structure_from_json,
    structure_size,
    truth_name,
    verifies_witness,
)
from finprin.syntax import SyntaxError_, parse_principle, render_principle, sentence_to_json
from finprin.translate import (
    binary_translation,
    export_cnf,
    flatten,
    is_tautology,
    metrics,
    simplify_constants,
    unary_translation,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_HYPOTHESIS = 3
EXIT_CAP = 4


def _load_principle(spec: str):
    """Catalog name, or a path to a DSL file."""
    try:
        return catalog.builtin(spec)
    except KeyError:
        pass
    try:
        with open(spec) as fh:
            sentence = parse_principle(fh.read())
        return catalog.PrincipleEntry(
            sentence.name, sentence, None, weak=False, strong=False,
            valid_on=lambda n: True, valid_note="user principle (validity not recorded)",
            determinacy_formula=None, determinacy_note="",
        )
    except OSError as err:
        raise SyntaxError_(f"not a catalog name and not a readable file: {spec} ({err})")


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def cmd_principle(args) -> int:
    if args.action == "list":
        for name in catalog.names():
            e = catalog.builtin(name)
            flags = []
            if e.weak:
                flags.append("weak")
            if e.strong:
                flags.append("strong")
            if e.model is not None:
                flags.append("model")
            print(f"{name}\t{', '.join(flags) or '-'}")
        return EXIT_OK
    e = _load_principle(args.name)
    if args.json:
        print(sentence_to_json(e.sentence))
    else:
        print(render_principle(e.sentence), end="")
        print(f"# weak: {e.weak}; strong: {e.strong}")
        print(f"# valid in the finite: {e.valid_note}")
        print(f"# determinacy: {e.determinacy_note}")
        if e.notes:
            print(f"# note: {e.notes}")
        if e.model is not None:
            print(f"# witness model: {e.model.description}")
    return EXIT_OK


def cmd_determinacy(args) -> int:
    e = _load_principle(args.name)
    ns = _parse_range(args.n)
    if args.format == "json":
        rows = []
        for n in ns:
            out = max_nonverifying(e.sentence, n, cap=args.cap)
            d = 0 if out.size is None else out.size + 1
            rows.append({"n": n, "d": d, "s_L": s_L(e.sentence.language, n), "method": out.method})
        print(json.dumps(rows, indent=2))
    else:
        print("n\td(n)\ts_L(n)\tratio")
        for n in ns:
            d = determinacy(e.sentence, n, cap=args.cap, exhaustive=args.exhaustive)
            sl = s_L(e.sentence.language, n)
            print(f"{n}\t{d}\t{sl}\t{sl / d if d else float('inf'):.4f}")
    return EXIT_OK


def cmd_largeness(args) -> int:
    e = _load_principle(args.name)
    if e.model is None:
        print(f"no witness model registered for {e.name}", file=sys.stderr)
        return EXIT_USAGE
    for n in _parse_range(args.n):
        rep = catalog.check_largeness(e.model, n, samples=args.samples,
                                      rng=random.Random(args.seed))
        status = "ok" if rep.ok else "VIOLATION"
        print(f"n={n}\t|V|={len(rep.overflow)}\tbound={rep.bound}\t{status}")
        if not rep.ok:
            return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_translate(args) -> int:
    e = _load_principle(args.name)
    translate = unary_translation if args.unary else binary_translation
    f = translate(e.sentence, args.n)
    if args.simplify:
        f = flatten(simplify_constants(f))
    if args.cnf:
        print(export_cnf(f, e.sentence.language, args.n, mode=args.cnf,
                         unary=args.unary), end="")
        return EXIT_OK
    depth, size = metrics(f)
    kind = "unary" if args.unary else "binary"
    print(f"# {kind} translation of {e.name} on [{args.n}]: depth={depth} size={size}")
    if args.check_tautology:
        print(f"# tautology: {is_tautology(f)}")
    return EXIT_OK


def cmd_adversary(args) -> int:
    e = _load_principle(args.name)
    session = adversary.new_session(e, n=args.n, budget=args.budget)
    return adversary.serve(session)


def cmd_demo_core_lemma(args) -> int:
    hop = catalog.builtin("HOP")
    wphp = catalog.builtin("WPHP")
    ctx = density.new_context(hop.model, hop.sentence, args.n)
    p = empty_oracle(hop.sentence.language, args.n)
    rng_seed = args.seed
    ok = 0
    for run in range(args.runs):
        fam = random_tree_family(
            wphp.sentence.language, args.m, args.b0, hop.sentence.language, args.n,
            rng_seed + run,
        )
        res = density.core_extend(ctx, p, fam, args.b0, wphp.sentence, lambda m: m + 1)
        c = build_C(fam, res.oracle)
        assert verifies_witness(c, wphp.sentence) is not None
        ok += 1
        for row in res.rounds:
            print(json.dumps({"run": run, **row}))
    print(json.dumps({"runs": args.runs, "verified": ok}))
    return EXIT_OK


def cmd_reduce(args) -> int:
    interp = reductions.builtin_interpretation(args.interpretation)
    src = catalog.builtin(interp.source_name).sentence
    tgt = catalog.builtin(interp.target_name).sentence
    with open(args.structure) as fh:
        b = structure_from_json(interp.source_language, fh.read())
    if args.action == "apply":
        out = reductions.apply_interpretation(interp, b)
        from finprin.partial import structure_to_json

        print(structure_to_json(out))
        return EXIT_OK
    target = reductions.apply_interpretation(interp, b)
    w = verifies_witness(target, tgt)
    if w is None:
        print("target structure has no witness (unexpected on a finite total structure)",
              file=sys.stderr)
        return EXIT_USAGE
    i, env = reductions.pullback_solution(interp, b, w, src, tgt)
    print(json.dumps({
        "target_witness": {"disjunct": w[0], "assignment": w[1]},
        "source_witness": {"disjunct": i, "assignment": env},
    }, indent=2))
    return EXIT_OK


def cmd_solve(args) -> int:
    e = _load_principle(args.name)
    with open(args.structure) as fh:
        a = structure_from_json(e.sentence.language, fh.read())
    w = verifies_witness(a, e.sentence)
    if w is None:
        print(json.dumps({"verifies": False, "value": truth_name(eval3(a, e.sentence))}))
    else:
        print(json.dumps({"verifies": True, "disjunct": w[0], "assignment": w[1]}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="finprin",
        description="experiments with finitary combinatorial principles",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("principle", help="list or show catalog principles")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?", default="")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_principle)

    p = sub.add_parser("determinacy", help="exact determinacy table")
    p.add_argument("name")
    p.add_argument("--n", required=True, help="single value, list, or lo..hi")
    p.add_argument("--exhaustive", action="store_true",
                   help="plain enumeration instead of branch-and-bound")
    p.add_argument("--cap", type=int, default=None, help="search node cap")
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.set_defaults(func=cmd_determinacy)

    p = sub.add_parser("largeness", help="overflow sizes of the witness model")
    p.add_argument("name")
    p.add_argument("--n", required=True)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_largeness)

    p = sub.add_parser("translate", help="propositional translation")
    p.add_argument("name")
    p.add_argument("--n", type=int, required=True)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--unary", action="store_true")
    grp.add_argument("--binary", action="store_true")
    p.add_argument("--simplify", action="store_true")
    p.add_argument("--cnf", choices=["direct", "tseitin"], default=None)
    p.add_argument("--check-tautology", action="store_true")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("adversary", help="serve the oracle protocol on stdio")
    p.add_argument("action", choices=["serve"])
    p.add_argument("name")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("demo", help="run a recorded demonstration")
    p.add_argument("which", choices=["core-lemma"])
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--m", type=int, default=16)
    p.add_argument("--b0", type=int, default=4)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo_core_lemma)

    p = sub.add_parser("reduce", help="apply an interpretation or pull a witness back")
    p.add_argument("action", choices=["apply", "pullback"])
    p.add_argument("interpretation", help="e.g. IND->PHP")
    p.add_argument("structure", help="JSON structure file over the source language")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="brute-force witness finder over a JSON structure")
    p.add_argument("name")
    p.add_argument("structure")
    p.set_defaults(func=cmd_solve)

    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (SyntaxError_, ContractError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisError as err:
        print(f"hypothesis violated: {err}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except FeasibilityError as err:
        print(f"feasibility cap: {err}", file=sys.stderr)
        return EXIT_CAP


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
