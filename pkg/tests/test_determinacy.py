import pytest

from finprin import catalog
from finprin.determinacy import (
    FeasibilityError,
    determinacy,
    max_nonverifying,
    max_nonverifying_exhaustive,
    weakness_report,
)
from finprin.partial import (
    all_partial_structures,
    eval3,
    structure_size,
    s_L,
    verifies,
    V1,
)
from finprin.syntax import parse_principle

CLOSED_FORMS = {
    "PHP": lambda n: n + 1,
    "OPHP": lambda n: 2 * n + 1,
    "LPHP": lambda n: 2 * n + 1,
    "WPHP": lambda n: n + 1,
    "WPHP2": lambda n: n + 1,
    "HOP": lambda n: n * n + n,
    "ITER": lambda n: n,
}


@pytest.mark.parametrize("name", sorted(CLOSED_FORMS))
@pytest.mark.parametrize("n", [2, 3])
def test_closed_forms(name, n):
    s = catalog.builtin(name).sentence
    assert determinacy(s, n) == CLOSED_FORMS[name](n)


def test_par_odd():
    s = catalog.builtin("PAR").sentence
    assert determinacy(s, 3) == 3


def test_par_even_is_invalid_so_maximal_plus_one():
    # The definition forces d(n) = s_L(n) + 1 on universes where the
    # principle fails in some total structure (recorded claims differ here).
    s = catalog.builtin("PAR").sentence
    assert determinacy(s, 2) == s_L(s.language, 2) + 1 == 3
    assert determinacy(s, 4) == 5


def test_ind():
    s = catalog.builtin("IND").sentence
    assert determinacy(s, 2) == 10
    assert determinacy(s, 3) == 17


def test_hdp_exceeds_lower_bound():
    e = catalog.builtin("HDP")
    assert determinacy(e.sentence, 2) > e.lower_bound(2) == 4


@pytest.mark.parametrize("name", ["PHP", "WPHP", "PAR", "ITER", "WPHP2"])
def test_modes_agree_at_n2(name):
    s = catalog.builtin(name).sentence
    a = max_nonverifying(s, 2)
    b = max_nonverifying_exhaustive(s, 2)
    assert a.size == b.size
    assert a.method == "branch-and-bound" and b.method == "exhaustive"


def test_witness_properties():
    s = catalog.builtin("PHP").sentence
    out = max_nonverifying(s, 3)
    assert out.size == 3 and structure_size(out.witness) == 3
    assert eval3(out.witness, s) != V1


def test_defining_inequality_full_enumeration_n2():
    # d(n) is tight: everything of size >= d verifies, something of size
    # d-1 does not; re-verified by full enumeration through eval3.
    for name in ("PHP", "WPHP", "PAR"):
        s = catalog.builtin(name).sentence
        d = determinacy(s, 2)
        hit_below = False
        for a in all_partial_structures(s.language, 2):
            sz = structure_size(a)
            v = eval3(a, s) == V1
            if sz >= d:
                assert v
            if sz == d - 1 and not v:
                hit_below = True
        assert hit_below


def test_degenerate_identity_sentence_flagged():
    s = parse_principle("principle ID { language { f/1 fun } exists x . x = x }")
    out = max_nonverifying(s, 3)
    assert out.degenerate and out.size is None
    assert determinacy(s, 3) == 0


def test_search_is_deterministic():
    s = catalog.builtin("WPHP").sentence
    a = max_nonverifying(s, 2)
    b = max_nonverifying(s, 2)
    assert a.witness == b.witness


def test_feasibility_cap():
    s = catalog.builtin("HOP").sentence
    with pytest.raises(FeasibilityError) as err:
        max_nonverifying(s, 3, cap=100)
    assert err.value.cap == 100


def test_weakness_report_wphp():
    s = catalog.builtin("WPHP").sentence
    rep = weakness_report(s, [2, 3, 4])
    ratios = [round(r.ratio, 4) for r in rep.rows]
    assert ratios == [round(4 / 3, 4), round(9 / 4, 4), round(16 / 5, 4)]
    assert rep.fitted_exponent is not None and rep.fitted_exponent > 0.8


def test_weakness_report_php_ratio_one():
    s = catalog.builtin("PHP").sentence
    rep = weakness_report(s, [2, 3, 4])
    assert all(abs(r.ratio - 1.0) < 1e-9 for r in rep.rows)


def test_rphp_lower_bound():
    e = catalog.builtin("RPHP")
    assert determinacy(e.sentence, 2) > e.lower_bound(2) == 4
