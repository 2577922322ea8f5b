import random

import pytest

from finprin import catalog
from finprin.catalog import check_largeness, hap_witness, hdp_witness, ind_enc, overflow_set
from finprin.partial import (
    eval3,
    find_embedding,
    induced_substructure,
    structure_size,
    s_L,
    V1,
)


def test_builtin_php_shape():
    e = catalog.builtin("PHP")
    assert [s.name for s in e.sentence.language.symbols] == ["f", "c"]
    assert len(e.sentence.matrix) == 2


def test_builtin_hop_shape():
    e = catalog.builtin("HOP")
    names = {(s.name, s.kind) for s in e.sentence.language.symbols}
    assert names == {("f", "fun"), ("prec", "rel")}
    assert len(e.sentence.matrix) == 3


def test_builtin_iter_has_builtins():
    e = catalog.builtin("ITER")
    assert e.sentence.language.order
    assert e.sentence.language.numerals == (0,)


def test_builtin_unknown():
    with pytest.raises(KeyError):
        catalog.builtin("NOPE")


def test_wphp_prime_alias():
    assert catalog.builtin("WPHP'").name == "WPHP2"


def test_overflow_successor():
    m = catalog.builtin("PHP").model
    assert overflow_set(m, [0, 1, 2]) == {3}


def test_overflow_hop():
    m = catalog.builtin("HOP").model
    for n in (2, 5, 16):
        assert overflow_set(m, list(range(n))) == {n}


def test_overflow_empty_fragment():
    m = catalog.builtin("HOP").model
    assert overflow_set(m, []) == set()
    # A constant escapes an empty fragment.
    succ = catalog.builtin("PHP").model
    assert overflow_set(succ, []) == {0}


def test_overflow_minimality():
    # Removing any point of V breaks closure into B0 + V.
    m = catalog.builtin("IND").model
    pts = m.canonical_slice(6)
    v = overflow_set(m, pts)
    for drop in v:
        rest = v - {drop}
        closed = all(
            m.fun_eval[s.name](*args) in set(pts) | rest
            for s in m.language.functions
            for args in _tuples(pts, s.arity)
        )
        assert not closed


def _tuples(points, arity):
    if arity == 0:
        yield ()
        return
    for head in points:
        for tail in _tuples(points, arity - 1):
            yield (head,) + tail


@pytest.mark.parametrize("name,bound", [
    ("PHP", 1), ("OPHP", 1), ("LPHP", 1), ("PAR", 1), ("HOP", 1), ("ITER", 1), ("IND", 2),
])
def test_largeness_up_to_64(name, bound):
    model = catalog.builtin(name).model
    for n in (1, 2, 10, 64):
        rep = check_largeness(model, n)
        assert rep.ok and len(rep.overflow) <= bound, (name, n, rep.overflow)


def test_largeness_sampled_embeddings_small():
    rng = random.Random(0)
    for name in ("PHP", "PAR", "HOP", "IND"):
        model = catalog.builtin(name).model
        rep = check_largeness(model, 4, samples=8, rng=rng)
        assert rep.ok and rep.embedding_failures == 0, name


def test_wphp_has_no_model():
    assert catalog.builtin("WPHP").model is None
    assert catalog.builtin("WPHP2").model is None
    assert catalog.builtin("RPHP").model is None
    assert catalog.builtin("HAP").model is None
    assert catalog.builtin("HDP").model is None


@pytest.mark.parametrize("name", [n for n in catalog.names() if catalog.builtin(n).model])
def test_model_slices_never_verify(name):
    # eval3 enumerates every assignment, so keep it to small n; the witness
    # search (equivalent to eval3 == 1, cross-checked in test_partial) covers
    # the rest of the range up to 8.
    from finprin.partial import verifies_witness

    e = catalog.builtin(name)
    for n in range(1, 9):
        sl = induced_substructure(e.model, e.model.canonical_slice(n))
        assert verifies_witness(sl, e.sentence) is None, (name, n)
        if n <= 5:
            assert eval3(sl, e.sentence) != V1, (name, n)


def test_ind_model_encoding():
    m = catalog.builtin("IND").model
    assert m.fun_eval["min"]() == ind_enc(0)
    assert m.fun_eval["max"]() == catalog.IND_TOP
    assert m.fun_eval["s"](catalog.IND_TOP) == catalog.IND_TOP
    assert m.rel_eval["prec"](ind_enc(3), catalog.IND_TOP) == 1
    assert m.rel_eval["prec"](catalog.IND_TOP, catalog.IND_TOP) == 0
    assert m.rel_eval["P"](catalog.IND_TOP) == 0


def test_ind_fragment_with_top_embeds_into_its_slice():
    m = catalog.builtin("IND").model
    pts = [catalog.IND_TOP, ind_enc(2), ind_enc(5)]
    frag = induced_substructure(m, sorted(pts))
    target_pts = m.slice_containing(pts)
    target = induced_substructure(m, sorted(target_pts))
    assert find_embedding(frag, target) is not None
    assert len(overflow_set(m, target_pts)) <= 2


def test_hdp_witness_bounds():
    from finprin.partial import verifies_witness

    e = catalog.builtin("HDP")
    for n in (2, 3, 4):
        w = hdp_witness(n)
        assert verifies_witness(w, e.sentence) is None
        assert eval3(w, e.sentence) != V1
        assert structure_size(w) >= e.lower_bound(n)


def test_hap_witness_bounds():
    from finprin.partial import verifies_witness

    e = catalog.builtin("HAP")
    for n in (2, 4, 8):
        w = hap_witness(n)
        assert verifies_witness(w, e.sentence) is None
        if n == 2:
            assert eval3(w, e.sentence) != V1
        assert structure_size(w) >= e.lower_bound(n)
        assert structure_size(w) == s_L(e.sentence.language, n) - (n.bit_length() - 1)


def test_par_model_even_slice_total_and_unverifying():
    e = catalog.builtin("PAR")
    sl = induced_substructure(e.model, e.model.canonical_slice(4))
    assert sl.is_total()
    assert eval3(sl, e.sentence) != V1


def test_classification_flags():
    assert catalog.builtin("WPHP").weak is True
    assert catalog.builtin("PHP").weak is False and catalog.builtin("PHP").strong is True
    assert catalog.builtin("HOP").strong is True
    assert catalog.builtin("HAP").strong is False
    assert catalog.builtin("PAR").valid_on(3) and not catalog.builtin("PAR").valid_on(2)
