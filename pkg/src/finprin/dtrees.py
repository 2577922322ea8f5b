"""Decision trees over oracle bits, answer sequences, and derived structures.

A tree is a deterministic node function from (input tuple, answer bits) to a
label: either a query for a relevant key or an output value.  Trees are kept
intensional (callbacks plus a declared height, checked dynamically); an
explicit table form exists for tiny trees and serialization, where the
classical odd/even integer convention (queries odd, outputs even) is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from finprin.encoding import (
    FunBitKey,
    PartialOracle,
    FullOracle,
    RelKey,
    is_relevant,
    key_from_text,
    key_numbering,
    key_to_text,
    len_bits,
)
from finprin.partial import ContractError, PartialStructure
from finprin.syntax import FUN, REL, Language


class MalformedTreeError(Exception):
    pass


@dataclass(frozen=True)
class Query:
    key: object  # a RelevantKey-shaped tuple; may be irrelevant wrt the oracle


@dataclass(frozen=True)
class Output:
    value: int


Label = Union[Query, Output]


@dataclass(frozen=True)
class AnswerSeq:
    bits: tuple[int, ...]
    status: str  # "complete" | "blocked"

    @property
    def complete(self) -> bool:
        return self.status == "complete"


@dataclass
class DecisionTree:
    """arity inputs, height-bounded node function."""

    arity: int
    height: int
    node: Callable[[tuple, tuple], Label]

    def label(self, args: Sequence[int], bits: Sequence[int]) -> Label:
        out = self.node(tuple(args), tuple(bits))
        if not isinstance(out, (Query, Output)):
            raise MalformedTreeError(f"node returned {out!r}")
        return out


def program_tree(arity: int, height: int, program: Callable) -> DecisionTree:
    """Tree from a generator program: yield keys, return the output value.

    The node function replays the program against the given answer prefix,
    which keeps it a pure function of (args, bits) and makes the
    once-output-always-output rule hold by construction.
    """

    def node(args, bits):
        gen = program(*args)
        try:
            key = next(gen)
        except StopIteration as stop:
            return Output(int(stop.value or 0))
        for b in bits:
            try:
                key = gen.send(b)
            except StopIteration as stop:
                return Output(int(stop.value or 0))
        return Query(key)

    return DecisionTree(arity, height, node)


def constant_tree(arity: int, value: int) -> DecisionTree:
    return DecisionTree(arity, 0, lambda args, bits: Output(value))


# ---------------------------------------------------------------------------
# Runs

def run_full(t: DecisionTree, args: Sequence[int], alpha: FullOracle) -> tuple[AnswerSeq, int]:
    """The unique complete sequence of oracle answers and the tree's output."""
    bits: list[int] = []
    while True:
        label = t.label(args, bits)
        if isinstance(label, Output):
            return AnswerSeq(tuple(bits), "complete"), label.value
        if len(bits) >= t.height:
            raise MalformedTreeError(f"tree exceeded height {t.height} on {tuple(args)}")
        bits.append(1 if alpha.member(label.key) else 0)


def run_partial(t: DecisionTree, args: Sequence[int], p) -> tuple[AnswerSeq, Optional[int]]:
    """Maximal sequence of partial-oracle answers; output only when complete.

    Clauses: an answered key gives its bit, an irrelevant key gives 0, and a
    relevant unanswered key blocks the run.  ``p`` may be any oracle view
    exposing language, n, and ``bit(key) -> 0 | 1 | None``.
    """
    bits: list[int] = []
    while True:
        label = t.label(args, bits)
        if isinstance(label, Output):
            return AnswerSeq(tuple(bits), "complete"), label.value
        if len(bits) >= t.height:
            raise MalformedTreeError(f"tree exceeded height {t.height} on {tuple(args)}")
        key = label.key
        if not is_relevant(key, p.language, p.n):
            bits.append(0)
            continue
        b = p.bit(key)
        if b is None:
            return AnswerSeq(tuple(bits), "blocked"), None
        bits.append(b)


def run_trace(t: DecisionTree, args: Sequence[int], p) -> tuple[AnswerSeq, Optional[int], list]:
    """run_partial plus the list of (key, answer-or-None) along the path.

    The final blocked query appears with answer None.
    """
    bits: list[int] = []
    trace: list = []
    while True:
        label = t.label(args, bits)
        if isinstance(label, Output):
            return AnswerSeq(tuple(bits), "complete"), label.value, trace
        if len(bits) >= t.height:
            raise MalformedTreeError(f"tree exceeded height {t.height} on {tuple(args)}")
        key = label.key
        if not is_relevant(key, p.language, p.n):
            bits.append(0)
            trace.append((key, 0))
            continue
        b = p.bit(key)
        if b is None:
            trace.append((key, None))
            return AnswerSeq(tuple(bits), "blocked"), None, trace
        bits.append(b)
        trace.append((key, b))


# ---------------------------------------------------------------------------
# Tree families and the derived structure C

@dataclass
class TreeFamily:
    """Per-symbol trees for a target language over universe [m]."""

    language: Language
    m: int
    trees: dict[str, DecisionTree]
    height_bound: int

    def __post_init__(self):
        for s in self.language.symbols:
            t = self.trees.get(s.name)
            if t is None:
                raise ContractError(f"missing tree for {s.name}")
            if t.arity != s.arity:
                raise ContractError(f"tree arity mismatch for {s.name}")
            if t.height > self.height_bound:
                raise ContractError(f"tree for {s.name} exceeds the family height bound")


def build_C(family: TreeFamily, oracle) -> PartialStructure:
    """The structure on [m] computed by running the family against an oracle.

    With a FullOracle every cell is defined.  Function outputs clamp to
    min(out, m-1), relation outputs to min(out, 1).
    """
    m = family.m
    out = PartialStructure(family.language, m)
    full = isinstance(oracle, FullOracle)
    for s in family.language.symbols:
        t = family.trees[s.name]
        table = (out.funs if s.kind == FUN else out.rels)[s.name]
        for idx in range(m ** s.arity):
            args = _index_tuple(idx, s.arity, m)
            if full:
                _, val = run_full(t, args, oracle)
            else:
                _, val = run_partial(t, args, oracle)
                if val is None:
                    continue
            table[idx] = min(val, m - 1) if s.kind == FUN else min(val, 1)
    return out


def _index_tuple(idx: int, arity: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(idx % n)
        idx //= n
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# Bit-probe helpers and families from interpretations

def probe_fun(source_lang: Language, n: int, name: str, args: tuple[int, ...]):
    """Generator fragment reading one function value from a binary code."""
    a = 0
    for i in range(len_bits(n)):
        bit = yield FunBitKey(name, args, i)
        if bit:
            a |= 1 << i
    return min(a, n - 1)


def bit_probe_family(lang: Language, n: int) -> TreeFamily:
    """Trees that read their own cell from the binary code; C equals decode."""
    trees = {}
    lb = len_bits(n)
    for s in lang.symbols:
        if s.kind == FUN:
            def program(*args, _name=s.name):
                value = yield from probe_fun(lang, n, _name, tuple(args))
                return value

            trees[s.name] = program_tree(s.arity, lb, program)
        else:
            def program(*args, _name=s.name):
                bit = yield RelKey(_name, tuple(args))
                return 1 if bit else 0

            trees[s.name] = program_tree(s.arity, 1, program)
    return TreeFamily(lang, n, trees, max(lb, 1))


def trees_from_interpretation(interp, n: int, m: int) -> TreeFamily:
    """A tree family computing the interpreted structure from a binary code.

    Each target symbol's tree evaluates its defining formula by probing the
    source oracle's bits; function symbols test their Herbrand candidate
    terms in order and output the first witness.  Heights are conservative
    static bounds (probes per term and atom, times candidates).
    """
    from finprin.reductions import Interpretation, eval_formula_gen, eval_term_gen, formula_probe_cost, term_probe_cost

    src = interp.source_language
    lb = len_bits(n)
    trees = {}
    bound = 1
    for s in interp.target_language.symbols:
        if s.kind == REL:
            delta = interp.rel_defs[s.name]
            height = formula_probe_cost(delta, src, n)

            def program(*args, _delta=delta):
                env = {f"x{i}": v for i, v in enumerate(args)}
                value = yield from eval_formula_gen(_delta, env, src, n, cache={})
                return 1 if value else 0

            trees[s.name] = program_tree(s.arity, height, program)
        else:
            delta = interp.fun_defs[s.name]
            terms = interp.herbrand.get(s.name)
            if terms is None:
                raise ContractError(f"no Herbrand term list for function symbol {s.name}")
            height = sum(
                term_probe_cost(t, src, n) + formula_probe_cost(delta, src, n) for t in terms
            )

            def program(*args, _delta=delta, _terms=terms):
                env = {f"x{i}": v for i, v in enumerate(args)}
                cache: dict = {}
                for cand in _terms:
                    v = yield from eval_term_gen(cand, env, src, n, cache)
                    env2 = dict(env)
                    env2["y"] = v
                    hit = yield from eval_formula_gen(_delta, env2, src, n, cache)
                    if hit:
                        return v
                raise ContractError(
                    f"Herbrand candidates exhausted for {s.name} on {args}; "
                    "the interpretation is invalid on this structure"
                )

            trees[s.name] = program_tree(s.arity, height, program)
        bound = max(bound, trees[s.name].height)
    return TreeFamily(interp.target_language, m, trees, bound)


def random_tree_family(target_lang: Language, m: int, b0: int,
                       source_lang: Language, n: int, seed: int) -> TreeFamily:
    """A deterministic pseudo-random family of height <= b0 source-probing trees.

    Each node hashes (seed, symbol, args, answers) to decide between
    outputting a value and querying a pseudo-random relevant source key, so
    the node function is pure and the settled-output rule holds by replay.
    """
    import hashlib

    from finprin.encoding import relevant_elements

    keys = relevant_elements(source_lang, n)

    def h(*parts) -> int:
        blob = "|".join(str(p) for p in parts).encode()
        return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")

    trees = {}
    for s in target_lang.symbols:
        def program(*args, _name=s.name, _kind=s.kind):
            bits: list[int] = []
            for step in range(b0):
                r = h(seed, _name, args, tuple(bits), step)
                # Output early with growing probability; always by step b0.
                if r % (b0 + 2) <= step:
                    return r % (m if _kind == FUN else 2)
                key = keys[r % len(keys)]
                ans = yield key
                bits.append(1 if ans else 0)
            return h(seed, _name, args, tuple(bits), "out") % (m if _kind == FUN else 2)

        trees[s.name] = program_tree(s.arity, b0, program)
    return TreeFamily(target_lang, m, trees, b0)


# ---------------------------------------------------------------------------
# Explicit table trees and s-expression serialization

@dataclass(frozen=True)
class TableNode:
    """(query KEY zero-branch one-branch) or (out N)."""

    query: Optional[object] = None
    zero: Optional["TableNode"] = None
    one: Optional["TableNode"] = None
    out: Optional[int] = None

    def height(self) -> int:
        if self.out is not None:
            return 0
        return 1 + max(self.zero.height(), self.one.height())


def table_tree(arity: int, root: TableNode) -> DecisionTree:
    def node(args, bits):
        cur = root
        for b in bits:
            if cur.out is not None:
                break  # extra answers cannot change a settled output
            cur = cur.one if b else cur.zero
        if cur.out is not None:
            return Output(cur.out)
        return Query(cur.query)

    return DecisionTree(arity, root.height(), node)


def node_to_sexpr(node: TableNode) -> str:
    if node.out is not None:
        return f"(out {node.out})"
    return f"(query {key_to_text(node.query)} {node_to_sexpr(node.zero)} {node_to_sexpr(node.one)})"


def node_from_sexpr(text: str) -> TableNode:
    # Key text contains parentheses, so tokenize by hand: a key atom runs to
    # the first whitespace outside its own balanced parentheses.
    pos = [0]

    def skip_ws():
        while pos[0] < len(text) and text[pos[0]].isspace():
            pos[0] += 1

    def expect(ch):
        skip_ws()
        if pos[0] >= len(text) or text[pos[0]] != ch:
            raise ContractError(f"expected {ch!r} at offset {pos[0]}")
        pos[0] += 1

    def word() -> str:
        skip_ws()
        start = pos[0]
        depth = 0
        while pos[0] < len(text):
            c = text[pos[0]]
            if c == "(" :
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
            elif c.isspace() and depth == 0:
                break
            pos[0] += 1
        if pos[0] == start:
            raise ContractError(f"expected a token at offset {start}")
        return text[start:pos[0]]

    def parse() -> TableNode:
        expect("(")
        head = word()
        if head == "out":
            val = int(word())
            expect(")")
            return TableNode(out=val)
        if head == "query":
            key = key_from_text(word())
            zero = parse()
            one = parse()
            expect(")")
            return TableNode(query=key, zero=zero, one=one)
        raise ContractError(f"bad s-expression head {head!r}")

    node = parse()
    skip_ws()
    if pos[0] != len(text):
        raise ContractError("trailing s-expression input")
    return node


def label_code(label: Label, numbering: dict) -> int:
    """Classical integer coding: queries odd (2k+1), outputs even (2v)."""
    if isinstance(label, Output):
        return 2 * label.value
    return 2 * numbering[label.key] + 1


def label_from_code(code: int, inverse_numbering: dict) -> Label:
    if code % 2 == 0:
        return Output(code // 2)
    return Query(inverse_numbering[(code - 1) // 2])
