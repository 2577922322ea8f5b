import io
import random

import pytest

from finprin import adversary, catalog
from finprin.adversary import (
    BudgetExhausted,
    Refutation,
    SOLVERS,
    Session,
    SolverClaim,
    answer_query,
    new_session,
    play,
    refute_claim,
    register_tree_family,
    serve,
    session_sound,
)
from finprin.density import HypothesisError
from finprin.dtrees import build_C, random_tree_family
from finprin.encoding import FunBitKey, RelKey, relevant_elements
from finprin.partial import ContractError, verifies_witness

PHP = catalog.builtin("PHP")
HOP = catalog.builtin("HOP")
WPHP = catalog.builtin("WPHP")


def test_default_budget():
    s = new_session(PHP, n=64)
    assert s.budget == 31  # floor(64 / 2) - 1


def test_n_below_r_L_rejected():
    with pytest.raises(ContractError):
        new_session(HOP, n=2)


def test_no_model_rejected():
    with pytest.raises(ContractError):
        new_session(WPHP.sentence, model=None, n=16)


def test_repeat_queries_consistent():
    s = new_session(PHP, n=64, budget=20)
    key = FunBitKey("f", (0,), 0)
    first = answer_query(s, key)
    for _ in range(5):
        assert answer_query(s, key) == first
    assert s.queries_answered == 1  # one cell defined, repeats free


def test_same_cell_bits_share_budget():
    s = new_session(PHP, n=64, budget=20)
    for i in range(6):  # len_bits(64) = 7 bits, same cell
        answer_query(s, FunBitKey("f", (3,), i))
    assert s.queries_answered == 1


def test_irrelevant_key_zero_and_free():
    s = new_session(PHP, n=64, budget=20)
    assert answer_query(s, RelKey("nosuch", (0,))) == 0
    assert answer_query(s, FunBitKey("f", (64,), 0)) == 0
    assert s.queries_answered == 0


def test_budget_enforced_before_collision_possible():
    # On PHP with even n, more than n/2 distinct cells exceed the default
    # budget of n/2 - 1 before any forced collision.
    n = 8
    s = new_session(PHP, n=n)  # budget 3
    for i in range(3):
        answer_query(s, FunBitKey("f", (i,), 0))
    with pytest.raises(BudgetExhausted):
        answer_query(s, FunBitKey("f", (3,), 0))


def test_refute_claim_php():
    s = new_session(PHP, n=64, budget=20)
    # Claim a collision at (0, 1): the adversary answers injectively.
    claim = SolverClaim(0, (0, 1, 5))  # x=0, y=1, u=5
    ref = refute_claim(s, claim)
    assert isinstance(ref, Refutation)
    assert ref.value == 0
    # Re-claiming the same thing stays refuted, deterministically.
    assert refute_claim(s, claim).literal_index == ref.literal_index


def test_refute_out_of_range_claim():
    s = new_session(PHP, n=64, budget=20)
    with pytest.raises(ContractError):
        refute_claim(s, SolverClaim(0, (0, 1, 64)))
    with pytest.raises(ContractError):
        refute_claim(s, SolverClaim(9, (0, 1, 2)))


def test_plays_always_refuted():
    rng = random.Random(0)
    for name, solver in SOLVERS.items():
        for _ in range(20):
            s = new_session(PHP, n=64, budget=20)
            out = play(s, solver, 20, rng)
            assert out.refuted
            assert verifies_witness(s.structure(), PHP.sentence) is None


def test_session_sound_after_plays():
    rng = random.Random(1)
    s = new_session(PHP, n=64, budget=20)
    play(s, SOLVERS["greedy"], 20, rng)
    assert session_sound(s)


def test_register_family_core_route():
    s = new_session(HOP, n=256, budget=20)
    fam = random_tree_family(WPHP.sentence.language, 16, 4, HOP.sentence.language, 256, seed=0)
    receipt = register_tree_family(s, fam, WPHP.sentence, 4, lambda m: m + 1)
    assert receipt.route == "core"
    c = build_C(fam, s.oracle)
    assert verifies_witness(c, WPHP.sentence) is not None


def test_register_family_small_m_route():
    s = new_session(HOP, n=256, budget=20)
    fam = random_tree_family(WPHP.sentence.language, 2, 4, HOP.sentence.language, 256, seed=1)
    receipt = register_tree_family(s, fam, WPHP.sentence, 4, lambda m: m + 1)
    assert receipt.route == "small-m"
    assert build_C(fam, s.oracle).is_total()


def test_family_then_queries_then_refutation():
    rng = random.Random(2)
    s = new_session(HOP, n=256, budget=20)
    fam = random_tree_family(WPHP.sentence.language, 16, 4, HOP.sentence.language, 256, seed=2)
    register_tree_family(s, fam, WPHP.sentence, 4, lambda m: m + 1)
    out = play(s, SOLVERS["random"], 20, rng)
    assert out.refuted
    # The registered family still verifies under the extended oracle.
    assert verifies_witness(build_C(fam, s.oracle), WPHP.sentence) is not None
    assert verifies_witness(s.structure(), HOP.sentence) is None
    assert session_sound(s)


def test_register_family_hypothesis_error_when_too_large():
    s = new_session(HOP, n=64, budget=20)
    fam = random_tree_family(WPHP.sentence.language, 16, 4, HOP.sentence.language, 64, seed=3)
    with pytest.raises(HypothesisError):
        register_tree_family(s, fam, WPHP.sentence, 4, lambda m: m + 1)


def test_serve_protocol_query_and_claim():
    s = new_session(PHP, n=64, budget=20)
    infile = io.StringIO("Q f(0)#0\nQ f(0)#1\nCLAIM 0 0 1 2\n")
    outfile = io.StringIO()
    code = serve(s, infile, outfile)
    lines = outfile.getvalue().splitlines()
    assert code == 0
    assert lines[0].startswith("A ") and lines[1].startswith("A ")
    assert lines[2].startswith("REFUTED ")


def test_serve_protocol_budget_line():
    s = new_session(PHP, n=8)  # budget 3
    cmds = "\n".join(f"Q f({i})#0" for i in range(5))
    outfile = io.StringIO()
    code = serve(s, io.StringIO(cmds + "\n"), outfile)
    assert code == 0
    assert outfile.getvalue().splitlines()[-1] == "BUDGET"


def test_serve_protocol_bad_command():
    s = new_session(PHP, n=64)
    outfile = io.StringIO()
    code = serve(s, io.StringIO("NOPE x\n"), outfile)
    assert code == 2
    assert outfile.getvalue().startswith("ERROR")
