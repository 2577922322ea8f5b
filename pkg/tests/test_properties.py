"""Cross-module property tests over generated structures and oracles."""

import pytest
from hypothesis import given, settings, strategies as st

from finprin import catalog
from finprin.dtrees import bit_probe_family, build_C, random_tree_family, run_full, run_partial
from finprin.encoding import (
    binary_code_of,
    decode_binary,
    decode_unary,
    encode_unary,
    oracle_from_set,
    oracle_of_partial,
    partial_of_oracle,
    relevant_elements,
)
from finprin.partial import (
    PartialStructure,
    eval3,
    structure_size,
    verifies_witness,
    V1,
)
from finprin.syntax import FUN, language

MIX = language("f/1 fun, R/2 rel")
PAR = catalog.builtin("PAR").sentence


@st.composite
def partial_structures(draw, lang=MIX, max_n=4):
    n = draw(st.integers(1, max_n))
    a = PartialStructure(lang, n)
    for s in lang.symbols:
        table = (a.funs if s.kind == FUN else a.rels)[s.name]
        hi = n if s.kind == FUN else 2
        for i in range(len(table)):
            table[i] = draw(st.one_of(st.none(), st.integers(0, hi - 1)))
    return a


@st.composite
def total_structures(draw, lang=MIX, max_n=4):
    n = draw(st.integers(1, max_n))
    a = PartialStructure(lang, n)
    for s in lang.symbols:
        table = (a.funs if s.kind == FUN else a.rels)[s.name]
        hi = n if s.kind == FUN else 2
        for i in range(len(table)):
            table[i] = draw(st.integers(0, hi - 1))
    return a


@given(partial_structures())
@settings(max_examples=120, deadline=None)
def test_partial_oracle_roundtrip_property(a):
    p = oracle_of_partial(a)
    assert partial_of_oracle(p) == a
    assert p.size() == structure_size(a)


@given(total_structures())
@settings(max_examples=120, deadline=None)
def test_coding_conversions_property(a):
    alpha = binary_code_of(a)
    assert decode_binary(MIX, a.n, alpha) == a
    assert decode_unary(MIX, a.n, encode_unary(a)) == a


@given(partial_structures(lang=catalog.builtin("PAR").sentence.language, max_n=4),
       st.integers(0, 2 ** 16 - 1))
@settings(max_examples=120, deadline=None)
def test_preservation_property(a, mask):
    # Dropping cells never creates a verifying substructure of a
    # non-verifying structure.
    cells = list(a.defined_cells())
    sub = PartialStructure(a.language, a.n)
    for j, (kind, name, args, v) in enumerate(cells):
        if (mask >> (j % 16)) & 1:
            idx = 0
            for x in args:
                idx = idx * a.n + x
            (sub.funs if kind == FUN else sub.rels)[name][idx] = v
    if verifies_witness(sub, PAR) is not None:
        assert verifies_witness(a, PAR) is not None
    # And the witness search agrees with the three-valued evaluation.
    assert (verifies_witness(a, PAR) is not None) == (eval3(a, PAR) == V1)


@given(partial_structures(max_n=3), st.integers(0, 10))
@settings(max_examples=80, deadline=None)
def test_run_partial_prefix_property(a, seed):
    p = oracle_of_partial(a)
    fam = random_tree_family(language("g/1 fun"), a.n, 3, MIX, a.n, seed)
    tree = fam.trees["g"]
    # Complete p to a full oracle by taking p1 as the member set.
    alpha = oracle_from_set(MIX, a.n, set(p.p1))
    for x in range(a.n):
        seq_p, out_p = run_partial(tree, (x,), p)
        seq_f, out_f = run_full(tree, (x,), alpha)
        assert seq_f.bits[: len(seq_p.bits)] == seq_p.bits
        if seq_p.complete:
            assert out_f == out_p


@given(total_structures(max_n=4))
@settings(max_examples=60, deadline=None)
def test_bit_probe_family_property(a):
    fam = bit_probe_family(MIX, a.n)
    assert build_C(fam, binary_code_of(a)) == a
