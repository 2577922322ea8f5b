import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from finprin.encoding import (
    FullOracle,
    FunBitKey,
    FunGraphKey,
    PartialOracle,
    RelKey,
    b_extension,
    binary_code_of,
    binary_from_unary,
    decode_binary,
    decode_unary,
    empty_oracle,
    encode_unary,
    extend_oracle,
    is_relevant,
    key_from_text,
    key_numbering,
    key_to_text,
    len_bits,
    oracle_from_set,
    oracle_from_text,
    oracle_of_partial,
    oracle_to_text,
    partial_of_oracle,
    relevant_elements,
    unary_code_defect,
    unary_from_binary,
)
from finprin.partial import ContractError, active_points, structure_size
from finprin.syntax import language
from oracles import random_partial, random_total

F1 = language("f/1 fun")
R1 = language("R/1 rel")
F2 = language("f/2 fun")
MIX = language("f/1 fun, R/2 rel")


def test_len_bits():
    assert [len_bits(n) for n in (1, 2, 3, 4, 7, 8)] == [1, 2, 2, 3, 3, 4]


def test_relevant_counts():
    assert len(relevant_elements(F1, 2)) == 4      # 2 tuples x 2 bits
    assert len(relevant_elements(R1, 3)) == 3
    assert len(relevant_elements(F2, 2)) == 8      # 4 tuples x 2 bits


def test_relevant_order_canonical():
    keys = relevant_elements(MIX, 2)
    assert keys[0] == FunBitKey("f", (0,), 0)
    assert keys[1] == FunBitKey("f", (0,), 1)
    assert keys[4] == RelKey("R", (0, 0))
    numbering = key_numbering(MIX, 2)
    assert numbering[keys[0]] == 1 and numbering[keys[-1]] == len(keys)


def test_decode_binary_single_low_bit():
    alpha = oracle_from_set(F1, 2, {FunBitKey("f", (0,), 0)})
    a = decode_binary(F1, 2, alpha)
    assert a.fun_value("f", (0,)) == 1
    assert a.fun_value("f", (1,)) == 0


def test_decode_binary_clamps_to_top():
    alpha = oracle_from_set(F1, 2, {FunBitKey("f", (1,), 0), FunBitKey("f", (1,), 1)})
    a = decode_binary(F1, 2, alpha)
    assert a.fun_value("f", (1,)) == 1  # bits give 3, clamped to n-1


def test_decode_binary_empty_oracle():
    alpha = oracle_from_set(MIX, 3, set())
    a = decode_binary(MIX, 3, alpha)
    assert all(v == 0 for v in a.funs["f"])
    assert all(v == 0 for v in a.rels["R"])
    assert a.is_total()


def test_decode_binary_total_for_random_oracles():
    rng = random.Random(0)
    keys = relevant_elements(MIX, 3)
    for _ in range(20):
        chosen = {k for k in keys if rng.random() < 0.5}
        a = decode_binary(MIX, 3, oracle_from_set(MIX, 3, chosen))
        assert a.is_total()


# -- unary ---------------------------------------------------------------------

def test_encode_unary_identity():
    a = random_partial(F1, 2, random.Random(1), density=0)
    a.funs["f"][0] = 0
    a.funs["f"][1] = 1
    keys = encode_unary(a)
    assert keys == {FunGraphKey("f", (0,), 0), FunGraphKey("f", (1,), 1)}


def test_decode_unary_rejects_non_graph():
    keys = {FunGraphKey("f", (0,), 0), FunGraphKey("f", (0,), 1), FunGraphKey("f", (1,), 0)}
    assert decode_unary(F1, 2, keys) is None
    assert unary_code_defect(F1, 2, keys) == ("f", (0,), "duplicate")
    assert unary_code_defect(F1, 2, {FunGraphKey("f", (0,), 0)}) == ("f", (1,), "missing")


def test_unary_roundtrip_random():
    rng = random.Random(2)
    for _ in range(50):
        n = rng.randrange(1, 7)
        a = random_total(MIX, n, rng)
        assert decode_unary(MIX, n, encode_unary(a)) == a


# -- conversions ----------------------------------------------------------------

def test_conversions_exhaustive_n2_unary_function_language():
    keys = relevant_elements(F1, 2)
    for mask in range(2 ** len(keys)):
        chosen = {k for i, k in enumerate(keys) if (mask >> i) & 1}
        alpha = oracle_from_set(F1, 2, chosen)
        u = unary_from_binary(F1, 2, alpha)
        assert decode_unary(F1, 2, u) == decode_binary(F1, 2, alpha)
        back = binary_from_unary(F1, 2, u)
        assert back is not None
        assert decode_binary(F1, 2, back) == decode_binary(F1, 2, alpha)


def test_conversions_randomized():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randrange(1, 9)
        a = random_total(MIX, n, rng)
        alpha = binary_code_of(a)
        assert decode_binary(MIX, n, alpha) == a
        u = unary_from_binary(MIX, n, alpha)
        assert decode_unary(MIX, n, u) == a
        assert decode_binary(MIX, n, binary_from_unary(MIX, n, u)) == a


def test_binary_from_unary_rejects_non_code():
    assert binary_from_unary(F1, 2, {FunGraphKey("f", (0,), 0)}) is None


def test_n1_single_bit_functions():
    a = random_total(F1, 1, random.Random(4))
    alpha = binary_code_of(a)
    assert decode_binary(F1, 1, alpha) == a
    assert len(relevant_elements(F1, 1)) == 1


# -- partial oracles ---------------------------------------------------------

def test_oracle_of_partial_single_cell():
    a = random_partial(F1, 2, random.Random(5), density=0)
    a.funs["f"][0] = 1
    p = oracle_of_partial(a)
    assert p.p1 == frozenset({FunBitKey("f", (0,), 0)})
    assert p.p0 == frozenset({FunBitKey("f", (0,), 1)})
    assert p.size() == 1


def test_oracle_of_partial_empty():
    p = oracle_of_partial(random_partial(F1, 2, random.Random(6), density=0))
    assert p.p0 == p.p1 == frozenset()
    assert p.size() == 0


def test_partial_oracle_roundtrip_random():
    rng = random.Random(7)
    for _ in range(60):
        n = rng.randrange(1, 7)
        a = random_partial(MIX, n, rng, density=rng.random())
        p = oracle_of_partial(a)
        assert partial_of_oracle(p) == a
        assert p.size() == structure_size(a)


def test_all_or_none_bit_rule_enforced():
    with pytest.raises(ContractError):
        PartialOracle(F1, 2, frozenset(), frozenset({FunBitKey("f", (0,), 0)}))


def test_disjointness_enforced():
    k = RelKey("R", (0, 0))
    with pytest.raises(ContractError):
        PartialOracle(MIX, 2, frozenset({k}), frozenset({k}))


def test_extension_and_b_extension():
    a = random_partial(F1, 4, random.Random(8), density=0)
    p = oracle_of_partial(a)
    assert extend_oracle(p, p) and b_extension(p, p, 0)
    a2 = a.with_cell("fun", "f", (0,), 2)
    q = oracle_of_partial(a2)
    assert extend_oracle(p, q) and b_extension(p, q, 1) and not b_extension(p, q, 0)
    a3 = a.with_cell("fun", "f", (1,), 2)
    r = oracle_of_partial(a3)
    assert not extend_oracle(q, r) and not extend_oracle(r, q)


def test_size_monotone_and_active_bound():
    rng = random.Random(9)
    for _ in range(30):
        a = random_partial(MIX, 4, rng, density=0.4)
        p = oracle_of_partial(a)
        b = partial_of_oracle(p)
        assert len(active_points(b)) <= p.size() * MIX.r_L()


# -- text forms ----------------------------------------------------------------

def test_key_text_roundtrip():
    for key in (RelKey("R", (0, 3)), FunBitKey("f", (1,), 2), FunGraphKey("g", (), 4)):
        assert key_from_text(key_to_text(key)) == key


def test_oracle_text_roundtrip():
    rng = random.Random(10)
    a = random_partial(MIX, 3, rng, density=0.5)
    p = oracle_of_partial(a)
    text = oracle_to_text(p)
    assert oracle_from_text(MIX, 3, text) == p


def test_is_relevant():
    assert is_relevant(FunBitKey("f", (1,), 1), F1, 2)
    assert not is_relevant(FunBitKey("f", (2,), 0), F1, 2)   # point out of range
    assert not is_relevant(FunBitKey("f", (0,), 2), F1, 2)   # bit out of range
    assert not is_relevant(RelKey("f", (0,)), F1, 2)         # wrong kind
    assert not is_relevant(RelKey("S", (0,)), F1, 2)         # unknown symbol
