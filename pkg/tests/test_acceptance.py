"""Acceptance suite: one test and one printed pass/fail line per criterion.

Run with  pytest tests/test_acceptance.py -v -s  to see the lines as they
complete.  Every tolerance is exact; runtime bounds are generous on desk
hardware (criterion 1 well under five minutes, criterion 6 well under ten).
"""

import itertools
import random
from contextlib import contextmanager

import pytest

from finprin import adversary, catalog, density, reductions
from finprin.adversary import SOLVERS, embedding_certificate, new_session, play
from finprin.determinacy import determinacy, max_nonverifying, max_nonverifying_exhaustive
from finprin.dtrees import build_C, random_tree_family, trees_from_interpretation
from finprin.encoding import (
    binary_code_of,
    decode_binary,
    empty_oracle,
    encode_unary,
    oracle_from_set,
    oracle_of_partial,
    partial_of_oracle,
    relevant_elements,
    unary_from_binary,
    binary_from_unary,
    decode_unary,
)
from finprin.partial import (
    PartialStructure,
    active_points,
    all_partial_structures,
    eval3,
    find_embedding,
    induced_substructure,
    literal_value,
    structure_size,
    s_L,
    verifies_witness,
    V1,
)
from finprin.syntax import formula_size, language
from finprin.translate import (
    PAnd,
    POr,
    binary_translation,
    eval_prop,
    export_cnf,
    flatten,
    is_literal_dnf,
    is_tautology,
    simplify_constants,
    taut_dnf,
    unary_translation,
)
from oracles import random_partial, random_total


@contextmanager
def criterion(num: int, label: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {num}: FAIL  {label}")
        raise
    print(f"ACCEPTANCE {num}: PASS  {label}")


# -- 1: determinacy table -------------------------------------------------------

def test_criterion_1_determinacy_table():
    with criterion(1, "determinacy table reproduces the recorded values"):
        expected = {
            "PHP": lambda n: n + 1,
            "OPHP": lambda n: 2 * n + 1,
            "LPHP": lambda n: 2 * n + 1,
            "WPHP": lambda n: n + 1,
            "WPHP2": lambda n: n + 1,
            "HOP": lambda n: n * n + n,
            "IND": lambda n: n * n + 2 * n + 2,
            "ITER": lambda n: n,
        }
        for name, f in expected.items():
            s = catalog.builtin(name).sentence
            for n in (2, 3):
                assert determinacy(s, n) == f(n), (name, n)
        # PAR at its valid (odd) size.
        assert determinacy(catalog.builtin("PAR").sentence, 3) == 3
        # Inequalities via exact search (HDP) and the recorded witness (HAP).
        hdp = catalog.builtin("HDP")
        assert determinacy(hdp.sentence, 2) > 4
        hap = catalog.builtin("HAP")
        w = catalog.hap_witness(4)
        bound = s_L(hap.sentence.language, 4) - 2
        assert structure_size(w) >= bound
        assert verifies_witness(w, hap.sentence) is None
        # d(4) exceeds the size of a non-verifying structure of that size.
        # Cross-check the search modes at n = 2 on two principles.
        for name in ("PHP", "WPHP"):
            s = catalog.builtin(name).sentence
            assert max_nonverifying(s, 2).size == max_nonverifying_exhaustive(s, 2).size


# -- 2: largeness ----------------------------------------------------------------

def test_criterion_2_largeness():
    with criterion(2, "overflow sizes within bounds for all n <= 64"):
        bounds = {"PHP": 1, "OPHP": 1, "LPHP": 1, "PAR": 1, "HOP": 1, "ITER": 1, "IND": 2}
        for name, bound in bounds.items():
            model = catalog.builtin(name).model
            for n in range(1, 65):
                v = catalog.overflow_set(model, model.canonical_slice(n))
                assert len(v) <= bound, (name, n, v)


# -- 3: codec round-trips -----------------------------------------------------------

def test_criterion_3_codec_roundtrips():
    with criterion(3, "codings are mutually inverse on decoded structures"):
        f1 = language("f/1 fun")
        # Exhaustive at n = 2 over all binary oracles of {f/1}.
        keys = relevant_elements(f1, 2)
        for mask in range(2 ** len(keys)):
            chosen = {k for i, k in enumerate(keys) if (mask >> i) & 1}
            alpha = oracle_from_set(f1, 2, chosen)
            a = decode_binary(f1, 2, alpha)
            u = unary_from_binary(f1, 2, alpha)
            assert decode_unary(f1, 2, u) == a
            assert decode_binary(f1, 2, binary_from_unary(f1, 2, u)) == a
        # Exhaustive partial-oracle round-trip at n = 2 for {f/1}.
        for a in all_partial_structures(f1, 2):
            assert partial_of_oracle(oracle_of_partial(a)) == a
        # Randomized: 10^4 cases at n <= 8.
        rng = random.Random(20240809)
        mix = language("f/2 fun, g/1 fun, R/1 rel")
        for case in range(10000):
            n = rng.randrange(1, 9)
            if case % 2:
                a = random_partial(mix, n, rng, density=rng.random())
                p = oracle_of_partial(a)
                assert partial_of_oracle(p) == a
                assert p.size() == structure_size(a)
            else:
                a = random_total(mix, n, rng)
                alpha = binary_code_of(a)
                u = unary_from_binary(mix, n, alpha)
                assert decode_unary(mix, n, u) == a
                assert decode_binary(mix, n, binary_from_unary(mix, n, u)) == a


# -- 4: translation agreement ----------------------------------------------------------

def test_criterion_4_translation_agreement():
    with criterion(4, "binary translations agree with decoded satisfaction; census"):
        for name in ("PHP", "WPHP", "PAR"):
            e = catalog.builtin(name)
            lang = e.sentence.language
            formula = binary_translation(e.sentence, 2)
            keys = relevant_elements(lang, 2)
            assert len(keys) <= 8
            for bits in itertools.product([0, 1], repeat=len(keys)):
                aset = {k for k, b in zip(keys, bits) if b}
                decoded = decode_binary(lang, 2, oracle_from_set(lang, 2, aset))
                assert eval_prop(formula, aset) == (
                    verifies_witness(decoded, e.sentence) is not None
                ), (name, aset)
        # Simplified unary WPHP census (frozen from a hand expansion at n=2).
        e = catalog.builtin("WPHP")
        f = flatten(simplify_constants(unary_translation(e.sentence, 2)))
        assert is_literal_dnf(f)
        fam = {"allneg": 0, "same": 0, "cross": 0}
        for c in (f.children if isinstance(f, POr) else (f,)):
            lits = c.children if isinstance(c, PAnd) else (c,)
            keys = [(l.key, l.positive) for l in lits]
            if all(not pos for _, pos in keys):
                assert len({k.args for k, _ in keys}) == 1 and len(keys) == 2
                fam["allneg"] += 1
            else:
                assert len(keys) == 2 and all(pos for _, pos in keys)
                (k1, _), (k2, _) = keys
                if k1.args == k2.args:
                    assert k1.value != k2.value
                    fam["same"] += 1
                else:
                    assert k1.value == k2.value
                    fam["cross"] += 1
        assert fam == {"allneg": 4, "same": 8, "cross": 32}


# -- 5: tautologies ---------------------------------------------------------------------

def test_criterion_5_tautologies_and_cnf():
    with criterion(5, "valid principles' binary translations tautological at n=2"):
        for name in catalog.names():
            e = catalog.builtin(name)
            if not e.valid_on(2):
                continue
            f = binary_translation(e.sentence, 2)
            assert is_tautology(f), name
            text = export_cnf(f, e.sentence.language, 2, mode="direct", unary=False)
            lines = [l for l in text.splitlines() if l and not l.startswith("c")]
            clauses = [tuple(int(x) for x in l.split()[:-1]) for l in lines[1:]]
            terms = [
                (frozenset(-x for x in cl if x < 0), frozenset(x for x in cl if x > 0))
                for cl in clauses
            ]
            assert taut_dnf(terms), name  # CNF of the negation is unsatisfiable


# -- 6: the core extension ------------------------------------------------------------

def test_criterion_6_core_extension_100_runs():
    with criterion(6, "core extension succeeds on 100 random families"):
        hop = catalog.builtin("HOP")
        wphp = catalog.builtin("WPHP")
        n, m, b0 = 256, 16, 4
        bound = b0 * formula_size(wphp.sentence)
        ctx0 = density.new_context(hop.model, hop.sentence, n)
        p0 = empty_oracle(hop.sentence.language, n)
        for seed in range(100):
            fam = random_tree_family(
                wphp.sentence.language, m, b0, hop.sentence.language, n, seed
            )
            res = density.core_extend(ctx0, p0, fam, b0, wphp.sentence, lambda mm: mm + 1)
            q = res.oracle
            c = build_C(fam, q)
            w = verifies_witness(c, wphp.sentence)
            assert w is not None
            # eval3(C, WPHP) = 1: the witnessed disjunct instantiates to a
            # closed conjunction of value 1, and the existential clauses take
            # the max over assignments, so the whole sentence has value 1.
            i, env = w
            assert all(literal_value(c, lit, env) == V1 for lit in wphp.sentence.matrix[i])
            assert q.size() <= p0.size() + bound
            # Embedding re-verified by a from-scratch search on the touched
            # fragment.
            b = partial_of_oracle(q)
            pts = sorted(active_points(b)) or [0]
            frag = induced_substructure(b, pts)
            image = sorted(res.context.embedding[x] for x in pts)
            target = induced_substructure(hop.model, image)
            assert find_embedding(frag, target) is not None


# -- 7: the adversary lower-bound demo ---------------------------------------------------

def _run_plays(entry, n, budget, plays, rng, with_family=None):
    refuted = 0
    fixtures = list(SOLVERS.values())
    for k in range(plays):
        session = new_session(entry, n=n, budget=budget)
        receipt = None
        if with_family is not None:
            fam_lang, m, b0, phi_t, d_t = with_family
            fam = random_tree_family(
                fam_lang, m, b0, entry.sentence.language, n, seed=k
            )
            receipt = adversary.register_tree_family(session, fam, phi_t, b0, d_t)
        solver = fixtures[k % len(fixtures)]
        out = play(session, solver, budget, rng)
        assert out.refuted
        refuted += 1
        assert verifies_witness(session.structure(), entry.sentence) is None
        embedding_certificate(session)
        if receipt is not None:
            c = build_C(receipt.family, session.oracle)
            assert verifies_witness(c, phi_t) is not None
        if k % 250 == 0:
            # Independent re-search of the embedding, and the literal
            # three-valued evaluation on (a cap-sized piece of) the active
            # fragment; eval3 enumerates len(pts)^k assignments, and a
            # sub-fragment's verification would lift by preservation, so
            # its non-verification is the honest affordable direct check
            # (the complete check is the witness search on the full
            # structure above).
            a = session.structure()
            pts = sorted(active_points(a)) or [0]
            frag = induced_substructure(a, pts)
            image = sorted(session.context.embedding[x] for x in pts)
            target = induced_substructure(session.model, image)
            assert find_embedding(frag, target) is not None
            k_vars = len(entry.sentence.exist_vars)
            cap_pts = pts[: max(2, int(2_000_00 ** (1 / k_vars)))]
            assert eval3(induced_substructure(a, cap_pts), entry.sentence) != V1
    return refuted


def test_criterion_7_adversary_lower_bound_demo():
    with criterion(7, "1000/1000 query-bounded plays refuted on PHP at n=64"):
        rng = random.Random(7)
        php = catalog.builtin("PHP")
        assert _run_plays(php, 64, 20, 1000, rng) == 1000


# -- 8: the main-theorem demo ---------------------------------------------------------

def test_criterion_8_weak_holds_strong_unforced():
    with criterion(8, "WPHP forced on every play while HOP stays unverified"):
        rng = random.Random(8)
        hop = catalog.builtin("HOP")
        wphp = catalog.builtin("WPHP")
        spec = (wphp.sentence.language, 16, 4, wphp.sentence, lambda m: m + 1)
        assert _run_plays(hop, 256, 20, 1000, rng, with_family=spec) == 1000


# -- 9: the reduction suite -----------------------------------------------------------

def test_criterion_9_reductions():
    with criterion(9, "interpretations valid at n=3; pullbacks and commutation"):
        names = ["HAP->HDP", "HDP->HOP", "IND->HOP", "IND->PHP"]
        for name in names:
            interp = reductions.builtin_interpretation(name)
            rep = reductions.check_validity(interp, 3)
            assert rep.ok, (name, rep.counterexample)
        # 200 random end-to-end pullbacks at n <= 6.
        rng = random.Random(9)
        for case in range(200):
            name = names[case % len(names)]
            interp = reductions.builtin_interpretation(name)
            src = catalog.builtin(interp.source_name).sentence
            tgt = catalog.builtin(interp.target_name).sentence
            n = rng.randrange(2, 7)
            b = random_total(interp.source_language, n, rng)
            target = reductions.apply_interpretation(interp, b)
            w = verifies_witness(target, tgt)
            assert w is not None
            i, env = reductions.pullback_solution(interp, b, w, src, tgt)
            assert all(literal_value(b, lit, env) == V1 for lit in src.matrix[i])
        # Tree-family realization commutes with direct application at n <= 6.
        for name in names:
            interp = reductions.builtin_interpretation(name)
            for n in (2, 4, 6):
                b = random_total(interp.source_language, n, rng)
                alpha = binary_code_of(b)
                fam = trees_from_interpretation(interp, n, n)
                assert build_C(fam, alpha) == reductions.apply_interpretation(interp, b)
