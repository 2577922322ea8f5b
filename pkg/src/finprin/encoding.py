"""Relevant elements and the unary / binary / partial-oracle codings.

Binary coding: a function cell (S, args) is spread over the bits
``FunBitKey(S, args, i)`` for i < len_bits(n), where len_bits(n) is the
length of the binary expansion of n; decoding assembles the bits and clamps
the value to min(a, n-1).  Unary coding stores function graphs instead.
A partial oracle is a disjoint pair (p0, p1) of answered keys in which each
function cell is present with all of its bits or none of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional, Union

from finprin.partial import (
    ContractError,
    PartialStructure,
    index_tuple,
    structure_size,
    tuple_index,
)
from finprin.syntax import FUN, REL, Language


def len_bits(n: int) -> int:
    """Length of the binary expansion of n (0 for n = 0)."""
    return n.bit_length()


class RelKey(NamedTuple):
    symbol: str
    args: tuple[int, ...]


class FunBitKey(NamedTuple):
    symbol: str
    args: tuple[int, ...]
    bit: int


class FunGraphKey(NamedTuple):
    symbol: str
    args: tuple[int, ...]
    value: int


RelevantKey = Union[RelKey, FunBitKey]
UnaryKey = Union[RelKey, FunGraphKey]


def is_relevant(key, lang: Language, n: int) -> bool:
    """Whether the coding convention assigns the key a meaning wrt (L, n)."""
    if isinstance(key, RelKey):
        sym = lang.symbol(key.symbol)
        return (
            sym is not None
            and sym.kind == REL
            and len(key.args) == sym.arity
            and all(0 <= a < n for a in key.args)
        )
    if isinstance(key, FunBitKey):
        sym = lang.symbol(key.symbol)
        return (
            sym is not None
            and sym.kind == FUN
            and len(key.args) == sym.arity
            and all(0 <= a < n for a in key.args)
            and 0 <= key.bit < len_bits(n)
        )
    return False


def relevant_elements(lang: Language, n: int) -> list[RelevantKey]:
    """All relevant keys in canonical order: symbol, tuple lex, bit index."""
    if n < 1:
        raise ContractError("n must be positive")
    out: list[RelevantKey] = []
    lb = len_bits(n)
    for s in lang.symbols:
        for idx in range(n ** s.arity):
            args = index_tuple(idx, s.arity, n)
            if s.kind == REL:
                out.append(RelKey(s.name, args))
            else:
                for i in range(lb):
                    out.append(FunBitKey(s.name, args, i))
    return out


def key_numbering(lang: Language, n: int) -> dict[RelevantKey, int]:
    """Canonical bijection onto 1-based integers, for variables and wire formats."""
    return {k: i + 1 for i, k in enumerate(relevant_elements(lang, n))}


def unary_elements(lang: Language, n: int) -> list[UnaryKey]:
    out: list[UnaryKey] = []
    for s in lang.symbols:
        for idx in range(n ** s.arity):
            args = index_tuple(idx, s.arity, n)
            if s.kind == REL:
                out.append(RelKey(s.name, args))
            else:
                for v in range(n):
                    out.append(FunGraphKey(s.name, args, v))
    return out


def unary_numbering(lang: Language, n: int) -> dict[UnaryKey, int]:
    return {k: i + 1 for i, k in enumerate(unary_elements(lang, n))}


# ---------------------------------------------------------------------------
# Key text form (used by oracle dumps and the solver protocol)

def key_to_text(key) -> str:
    args = ",".join(str(a) for a in key.args)
    if isinstance(key, RelKey):
        return f"{key.symbol}({args})"
    if isinstance(key, FunBitKey):
        return f"{key.symbol}({args})#{key.bit}"
    return f"{key.symbol}({args})={key.value}"


def key_from_text(text: str):
    text = text.strip()
    head, _, tail = text.partition("(")
    body, _, rest = tail.partition(")")
    args = tuple(int(a) for a in body.split(",")) if body.strip() else ()
    if rest.startswith("#"):
        return FunBitKey(head, args, int(rest[1:]))
    if rest.startswith("="):
        return FunGraphKey(head, args, int(rest[1:]))
    if rest:
        raise ContractError(f"cannot parse key {text!r}")
    return RelKey(head, args)


# ---------------------------------------------------------------------------
# Full oracles

@dataclass(frozen=True)
class FullOracle:
    """Total membership over relevant keys; irrelevant keys are never members."""

    language: Language
    n: int
    membership: Callable[[RelevantKey], bool]

    def member(self, key) -> bool:
        if not is_relevant(key, self.language, self.n):
            return False
        return bool(self.membership(key))


def oracle_from_set(lang: Language, n: int, keys: Iterable[RelevantKey]) -> FullOracle:
    keyset = frozenset(keys)
    return FullOracle(lang, n, lambda k: k in keyset)


def decode_binary(lang: Language, n: int, alpha: FullOracle) -> PartialStructure:
    """The unique total structure with binary code alpha (with min-clamp)."""
    out = PartialStructure(lang, n)
    lb = len_bits(n)
    for s in lang.symbols:
        table = (out.funs if s.kind == FUN else out.rels)[s.name]
        for idx in range(n ** s.arity):
            args = index_tuple(idx, s.arity, n)
            if s.kind == REL:
                table[idx] = 1 if alpha.member(RelKey(s.name, args)) else 0
            else:
                a = 0
                for i in range(lb):
                    if alpha.member(FunBitKey(s.name, args, i)):
                        a |= 1 << i
                table[idx] = min(a, n - 1)
    return out


# ---------------------------------------------------------------------------
# Unary coding

def encode_unary(a: PartialStructure) -> set[UnaryKey]:
    if not a.is_total():
        raise ContractError("unary code requires a total structure")
    out: set[UnaryKey] = set()
    for kind, name, args, v in a.defined_cells():
        if kind == REL:
            if v:
                out.add(RelKey(name, args))
        else:
            out.add(FunGraphKey(name, args, v))
    return out


def unary_code_defect(lang: Language, n: int, keys: set[UnaryKey]):
    """None when the keys are a structure's unary code, else the offense."""
    for s in lang.functions:
        for idx in range(n ** s.arity):
            args = index_tuple(idx, s.arity, n)
            values = [k.value for k in keys if isinstance(k, FunGraphKey) and k.symbol == s.name and k.args == args]
            if not values:
                return (s.name, args, "missing")
            if len(values) > 1:
                return (s.name, args, "duplicate")
    return None


def decode_unary(lang: Language, n: int, keys: set[UnaryKey]) -> Optional[PartialStructure]:
    """The coded total structure, or None when the function keys are not graphs."""
    if unary_code_defect(lang, n, keys) is not None:
        return None
    out = PartialStructure(lang, n)
    for s in lang.relations:
        table = out.rels[s.name]
        for idx in range(n ** s.arity):
            table[idx] = 1 if RelKey(s.name, index_tuple(idx, s.arity, n)) in keys else 0
    for s in lang.functions:
        table = out.funs[s.name]
        for k in keys:
            if isinstance(k, FunGraphKey) and k.symbol == s.name:
                table[tuple_index(k.args, n)] = k.value
    return out


def unary_from_binary(lang: Language, n: int, alpha: FullOracle) -> set[UnaryKey]:
    """The unary code of the binary-decoded structure."""
    return encode_unary(decode_binary(lang, n, alpha))


def binary_from_unary(lang: Language, n: int, keys: set[UnaryKey]) -> Optional[FullOracle]:
    """A binary code of the unary-coded structure; None when keys are not a code."""
    a = decode_unary(lang, n, keys)
    if a is None:
        return None
    return binary_code_of(a)


def binary_code_of(a: PartialStructure) -> FullOracle:
    """The binary code of a total structure."""
    if not a.is_total():
        raise ContractError("binary code requires a total structure")
    keys: set[RelevantKey] = set()
    lb = len_bits(a.n)
    for kind, name, args, v in a.defined_cells():
        if kind == REL:
            if v:
                keys.add(RelKey(name, args))
        else:
            for i in range(lb):
                if (v >> i) & 1:
                    keys.add(FunBitKey(name, args, i))
    return oracle_from_set(a.language, a.n, keys)


# ---------------------------------------------------------------------------
# Partial oracles

@dataclass(frozen=True)
class PartialOracle:
    """Disjoint answered-bit sets (p0, p1) coding a partial structure.

    Function cells obey the all-or-none rule: for each (S, args) either every
    bit index below len_bits(n) is answered or none is.
    """

    language: Language
    n: int
    p0: frozenset = frozenset()
    p1: frozenset = frozenset()

    def __post_init__(self):
        if self.p0 & self.p1:
            raise ContractError("p0 and p1 must be disjoint")
        lb = len_bits(self.n)
        cells: dict[tuple[str, tuple[int, ...]], int] = {}
        for k in self.p0 | self.p1:
            if not is_relevant(k, self.language, self.n):
                raise ContractError(f"irrelevant key {k}")
            if isinstance(k, FunBitKey):
                cells[(k.symbol, k.args)] = cells.get((k.symbol, k.args), 0) + 1
        for cell, cnt in cells.items():
            if cnt != lb:
                raise ContractError(f"function cell {cell} has {cnt} of {lb} bits answered")

    def bit(self, key) -> Optional[int]:
        """1 / 0 for answered keys, None for relevant-but-unanswered ones."""
        if key in self.p1:
            return 1
        if key in self.p0:
            return 0
        return None

    def defined_cell(self, kind: str, symbol: str, args: tuple[int, ...]) -> bool:
        if kind == REL:
            return RelKey(symbol, args) in self.p0 or RelKey(symbol, args) in self.p1
        probe = FunBitKey(symbol, args, 0)
        return probe in self.p0 or probe in self.p1

    def size(self) -> int:
        """Number of coded cells; equals the coded structure's size."""
        rel = sum(1 for k in self.p0 | self.p1 if isinstance(k, RelKey))
        fun_cells = {(k.symbol, k.args) for k in self.p0 | self.p1 if isinstance(k, FunBitKey)}
        return rel + len(fun_cells)


def empty_oracle(lang: Language, n: int) -> PartialOracle:
    return PartialOracle(lang, n)


def oracle_of_partial(a: PartialStructure) -> PartialOracle:
    """Code a partial structure bit-wise; rejects non-encodable values."""
    p0: set[RelevantKey] = set()
    p1: set[RelevantKey] = set()
    lb = len_bits(a.n)
    for kind, name, args, v in a.defined_cells():
        if kind == REL:
            (p1 if v else p0).add(RelKey(name, args))
            continue
        if not 0 <= v < a.n:
            raise ContractError(f"value {v} for {name}{args} is not in [n]")
        # Values in [n] always encode exactly: min(v, n-1) = v.
        for i in range(lb):
            (p1 if (v >> i) & 1 else p0).add(FunBitKey(name, args, i))
    return PartialOracle(a.language, a.n, frozenset(p0), frozenset(p1))


def partial_of_oracle(p: PartialOracle) -> PartialStructure:
    out = PartialStructure(p.language, p.n)
    lb = len_bits(p.n)
    seen_fun: set[tuple[str, tuple[int, ...]]] = set()
    for k in p.p0 | p.p1:
        if isinstance(k, RelKey):
            out.rels[k.symbol][tuple_index(k.args, p.n)] = 1 if k in p.p1 else 0
        else:
            seen_fun.add((k.symbol, k.args))
    for symbol, args in seen_fun:
        a = 0
        for i in range(lb):
            if FunBitKey(symbol, args, i) in p.p1:
                a |= 1 << i
        out.funs[symbol][tuple_index(args, p.n)] = min(a, p.n - 1)
    return out


def oracle_size(p: PartialOracle) -> int:
    return p.size()


def extend_oracle(p: PartialOracle, q: PartialOracle) -> bool:
    """Whether q extends p (componentwise inclusion of answered bits)."""
    if (p.language, p.n) != (q.language, q.n):
        raise ContractError("mismatched language or universe")
    return p.p0 <= q.p0 and p.p1 <= q.p1


def b_extension(p: PartialOracle, q: PartialOracle, b: int) -> bool:
    """Whether q is a b-extension of p."""
    return extend_oracle(p, q) and q.size() <= p.size() + b


def merge_oracle(p: PartialOracle, adds0: Iterable, adds1: Iterable) -> PartialOracle:
    return PartialOracle(p.language, p.n, p.p0 | frozenset(adds0), p.p1 | frozenset(adds1))


def consistent_with(p: PartialOracle, alpha: FullOracle) -> bool:
    """p1 inside alpha and p0 outside it."""
    return all(alpha.member(k) for k in p.p1) and not any(alpha.member(k) for k in p.p0)


def completions_sample(p: PartialOracle, rng) -> FullOracle:
    """A random full oracle consistent with p."""
    fixed1 = set(p.p1)
    fixed0 = set(p.p0)
    extra = {k for k in relevant_elements(p.language, p.n) if k not in fixed1 and k not in fixed0 and rng.random() < 0.5}
    return oracle_from_set(p.language, p.n, fixed1 | extra)


def oracle_to_text(p: PartialOracle) -> str:
    """One key per line in canonical order, '+' for p1 and '-' for p0."""
    lines = []
    for k in relevant_elements(p.language, p.n):
        if k in p.p1:
            lines.append("+" + key_to_text(k))
        elif k in p.p0:
            lines.append("-" + key_to_text(k))
    return "\n".join(lines) + ("\n" if lines else "")


def oracle_from_text(lang: Language, n: int, text: str) -> PartialOracle:
    p0: set[RelevantKey] = set()
    p1: set[RelevantKey] = set()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        sign, key = line[0], key_from_text(line[1:])
        if sign == "+":
            p1.add(key)
        elif sign == "-":
            p0.add(key)
        else:
            raise ContractError(f"bad oracle line {line!r}")
    return PartialOracle(lang, n, frozenset(p0), frozenset(p1))
