"""Propositional translations of principles; simplification; CNF export.

Formulas are in negation normal form over constants 0/1, literals on coding
keys, and AND/OR nodes of arbitrary fan-in.  The unary translation renders
"the unary code is a structure implies some witness tuple works" over graph
keys; the binary translation renders "some witness tuple works in the
binary-coded structure" over bit keys, expanding function atoms through the
two-branch graph formula (exact bit match below the top value, or a bit
pattern exceeding it, clamped).  Bounded quantifiers and the witness block
are expanded directly over [n] tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from finprin.encoding import (
    FunBitKey,
    FunGraphKey,
    RelKey,
    key_numbering,
    key_to_text,
    len_bits,
    unary_numbering,
)
from finprin.partial import ContractError, PartialStructure
from finprin.syntax import (
    FUN,
    REL,
    BasicSentence,
    EqLit,
    FunLit,
    Language,
    RelLit,
    _is_numeral,
)


@dataclass(frozen=True)
class PConst:
    value: int  # 0 or 1


@dataclass(frozen=True)
class PLit:
    key: object  # UnaryKey or RelevantKey
    positive: bool = True


@dataclass(frozen=True)
class PAnd:
    children: tuple


@dataclass(frozen=True)
class POr:
    children: tuple


PropFormula = Union[PConst, PLit, PAnd, POr]

TRUE = PConst(1)
FALSE = PConst(0)


def pand(children: Iterable[PropFormula]) -> PropFormula:
    kids = tuple(children)
    if not kids:
        return TRUE
    if len(kids) == 1:
        return kids[0]
    return PAnd(kids)


def por(children: Iterable[PropFormula]) -> PropFormula:
    kids = tuple(children)
    if not kids:
        return FALSE
    if len(kids) == 1:
        return kids[0]
    return POr(kids)


def pneg(f: PropFormula) -> PropFormula:
    """Negation by the NNF swap of AND/OR, 0/1, literal polarity."""
    if isinstance(f, PConst):
        return PConst(1 - f.value)
    if isinstance(f, PLit):
        return PLit(f.key, not f.positive)
    if isinstance(f, PAnd):
        return POr(tuple(pneg(c) for c in f.children))
    return PAnd(tuple(pneg(c) for c in f.children))


def eval_prop(f: PropFormula, assignment) -> bool:
    """assignment: set of true keys, or a mapping key -> bool."""
    member = (lambda k: k in assignment) if isinstance(assignment, (set, frozenset)) else (
        lambda k: bool(assignment[k])
    )

    def ev(g) -> bool:
        if isinstance(g, PConst):
            return bool(g.value)
        if isinstance(g, PLit):
            v = member(g.key)
            return v if g.positive else not v
        if isinstance(g, PAnd):
            return all(ev(c) for c in g.children)
        return any(ev(c) for c in g.children)

    return ev(f)


def prop_vars(f: PropFormula) -> set:
    if isinstance(f, PConst):
        return set()
    if isinstance(f, PLit):
        return {f.key}
    out: set = set()
    for c in f.children:
        out |= prop_vars(c)
    return out


# ---------------------------------------------------------------------------
# Translations

def _matrix_literal_unary(lit, env: dict[str, int], n: int) -> PropFormula:
    """Atom translation for the unary coding: function atoms are graph keys."""
    if isinstance(lit, EqLit):
        return PConst(int((env[lit.left] == env[lit.right]) == lit.positive))
    if isinstance(lit, RelLit):
        args = tuple(env[v] for v in lit.args)
        if lit.name == "<":
            return PConst(int(args[0] < args[1]))
        return PLit(RelKey(lit.name, args), lit.positive)
    if _is_numeral(lit.name):
        k = int(lit.name)
        return PConst(int(k < n and env[lit.value] == k))
    args = tuple(env[v] for v in lit.args)
    return PLit(FunGraphKey(lit.name, args, env[lit.value]), True)


def graph_formula(name: str, args: tuple[int, ...], value: int, n: int) -> PropFormula:
    """The binary coding's graph formula for f(args) = value on [n].

    First branch: value < n and the bits match value exactly.  Second
    branch: value = n-1 and the bits code a number above n-1 (some bit set
    where n-1 has a zero, all higher bits agreeing with n-1), which the
    decoding clamps down.
    """
    lb = len_bits(n)
    exact = pand(
        [PConst(int(value < n))]
        + [PLit(FunBitKey(name, args, i), bool((value >> i) & 1)) for i in range(lb)]
    )
    top = n - 1
    overflow_cases = []
    for i in range(lb):
        if (top >> i) & 1:
            continue
        overflow_cases.append(
            pand(
                [PLit(FunBitKey(name, args, i), True)]
                + [
                    PLit(FunBitKey(name, args, j), bool((top >> j) & 1))
                    for j in range(i + 1, lb)
                ]
            )
        )
    clamp = pand([PConst(int(value == top)), por(overflow_cases)])
    return por([exact, clamp])


def _matrix_literal_binary(lit, env: dict[str, int], n: int) -> PropFormula:
    if isinstance(lit, EqLit):
        return PConst(int((env[lit.left] == env[lit.right]) == lit.positive))
    if isinstance(lit, RelLit):
        args = tuple(env[v] for v in lit.args)
        if lit.name == "<":
            return PConst(int(args[0] < args[1]))
        return PLit(RelKey(lit.name, args), lit.positive)
    if _is_numeral(lit.name):
        k = int(lit.name)
        return PConst(int(k < n and env[lit.value] == k))
    args = tuple(env[v] for v in lit.args)
    return graph_formula(lit.name, args, env[lit.value], n)


def _witness_block(s: BasicSentence, n: int, lit_translate) -> PropFormula:
    """OR over witness tuples of the translated matrix (direct expansion)."""
    tuples = itertools.product(range(n), repeat=len(s.exist_vars))
    out = []
    for combo in tuples:
        env = dict(zip(s.exist_vars, combo))
        disjuncts = []
        for disj in s.matrix:
            disjuncts.append(pand([lit_translate(lit, env, n) for lit in disj]))
        out.append(por(disjuncts))
    return por(out)


def structure_antecedent(lang: Language, n: int) -> PropFormula:
    """Translation of "the unary code is a structure": totality and
    functionality of every function symbol's graph keys."""
    parts = []
    for sym in lang.functions:
        for idx in range(n ** sym.arity):
            args = _index_tuple(idx, sym.arity, n)
            parts.append(por([PLit(FunGraphKey(sym.name, args, v), True) for v in range(n)]))
        for idx in range(n ** sym.arity):
            args = _index_tuple(idx, sym.arity, n)
            for v in range(n):
                for v2 in range(n):
                    parts.append(
                        por(
                            [
                                PConst(int(v == v2)),
                                PLit(FunGraphKey(sym.name, args, v), False),
                                PLit(FunGraphKey(sym.name, args, v2), False),
                            ]
                        )
                    )
    return pand(parts)


def unary_translation(s: BasicSentence, n: int) -> PropFormula:
    """"The unary code is a structure" implies "some witness tuple works"."""
    if n < 1:
        raise ContractError("n must be positive")
    ante = structure_antecedent(s.language, n)
    cons = _witness_block(s, n, _matrix_literal_unary)
    return por([pneg(ante), cons])


def binary_translation(s: BasicSentence, n: int) -> PropFormula:
    """"Some witness tuple works in the binary-coded structure"."""
    if n < 1:
        raise ContractError("n must be positive")
    return _witness_block(s, n, _matrix_literal_binary)


def _index_tuple(idx: int, arity: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(idx % n)
        idx //= n
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# Simplification, flattening, substitution

def simplify_constants(f: PropFormula) -> PropFormula:
    """Fixpoint of 0|F -> F, 1&F -> F, 0&F -> 0, 1|F -> 1 (bottom-up)."""
    if isinstance(f, (PConst, PLit)):
        return f
    kids = [simplify_constants(c) for c in f.children]
    if isinstance(f, PAnd):
        out = []
        for c in kids:
            if isinstance(c, PConst):
                if c.value == 0:
                    return FALSE
                continue
            out.append(c)
        return pand(out)
    out = []
    for c in kids:
        if isinstance(c, PConst):
            if c.value == 1:
                return TRUE
            continue
        out.append(c)
    return por(out)


def flatten(f: PropFormula) -> PropFormula:
    """Merge nested same-connective layers and unwrap singletons."""
    if isinstance(f, (PConst, PLit)):
        return f
    cls = type(f)
    kids: list[PropFormula] = []
    for c in f.children:
        c = flatten(c)
        if isinstance(c, cls):
            kids.extend(c.children)
        else:
            kids.append(c)
    return pand(kids) if cls is PAnd else por(kids)


def substitute(f: PropFormula, sigma: dict) -> PropFormula:
    """Simultaneous replacement of variables by formulas, renormalized to NNF."""
    if isinstance(f, PConst):
        return f
    if isinstance(f, PLit):
        if f.key in sigma:
            g = sigma[f.key]
            return g if f.positive else pneg(g)
        return f
    kids = tuple(substitute(c, sigma) for c in f.children)
    return PAnd(kids) if isinstance(f, PAnd) else POr(kids)


# ---------------------------------------------------------------------------
# Metrics

def metrics(f: PropFormula) -> tuple[int, int]:
    """(depth, size): depth counts connective alternations after merging
    same-connective layers; size counts nodes of the given tree."""

    def size(g) -> int:
        if isinstance(g, (PConst, PLit)):
            return 1
        return 1 + sum(size(c) for c in g.children)

    def depth(g, parent) -> int:
        if isinstance(g, (PConst, PLit)):
            return 0
        mine = type(g)
        extra = 0 if mine is parent else 1
        if not g.children:
            return extra
        return extra + max(depth(c, mine) for c in g.children)

    return depth(f, None), size(f)


# ---------------------------------------------------------------------------
# DNF canonicalization and tautology checking

class NotDNF(Exception):
    pass


def to_dnf_terms(f: PropFormula, max_terms: int = 200000) -> list[tuple[frozenset, frozenset]]:
    """Terms (pos-keys, neg-keys) of a DNF equivalent, by bounded distribution.

    Raises NotDNF when the distribution would exceed max_terms.  Constants
    are expected to be simplified away first (a bare constant is handled).
    """
    f = flatten(simplify_constants(f))
    if isinstance(f, PConst):
        return [(frozenset(), frozenset())] if f.value else []

    def terms_of(g) -> list[tuple[frozenset, frozenset]]:
        if isinstance(g, PLit):
            return [(frozenset([g.key]), frozenset())] if g.positive else [
                (frozenset(), frozenset([g.key]))
            ]
        if isinstance(g, PConst):
            return [(frozenset(), frozenset())] if g.value else []
        if isinstance(g, POr):
            out = []
            for c in g.children:
                out.extend(terms_of(c))
                if len(out) > max_terms:
                    raise NotDNF("DNF blowup")
            return out
        # PAnd: distribute children pairwise.
        acc: list[tuple[frozenset, frozenset]] = [(frozenset(), frozenset())]
        for c in g.children:
            sub = terms_of(c)
            nxt = []
            for p1, n1 in acc:
                for p2, n2 in sub:
                    p, nn = p1 | p2, n1 | n2
                    if p & nn:
                        continue  # contradictory term drops out
                    nxt.append((p, nn))
            if len(nxt) > max_terms:
                raise NotDNF("DNF blowup")
            acc = nxt
        return acc

    return terms_of(f)


def is_literal_dnf(f: PropFormula) -> bool:
    """Whether f is already a disjunction of conjunctions of literals."""
    f = flatten(f)
    if isinstance(f, (PConst, PLit)):
        return True

    def lit_conj(g) -> bool:
        if isinstance(g, (PLit, PConst)):
            return True
        return isinstance(g, PAnd) and all(isinstance(c, (PLit, PConst)) for c in g.children)

    if isinstance(f, PAnd):
        return lit_conj(f)
    return all(lit_conj(c) for c in f.children)


def _key_order(k) -> tuple:
    return (k.__class__.__name__, k)


def taut_dnf(terms: list[tuple[frozenset, frozenset]]) -> bool:
    """Exhaustive splitting check that the DNF covers all assignments.

    Splits on a variable of the shortest live term (so one branch keeps
    shrinking that term toward the empty, closing, term while the other
    kills it).  Complete: the two branches partition the assignments, and a
    branch closes exactly when some term has all its literals satisfied.
    """

    def rec(tms) -> bool:
        shortest = None
        slen = None
        for p, nn in tms:
            L = len(p) + len(nn)
            if L == 0:
                return True
            if slen is None or L < slen:
                shortest, slen = (p, nn), L
        if shortest is None:
            return False
        p, nn = shortest
        v = min(p | nn, key=_key_order)
        t_true = list({(pp - {v}, pn) for pp, pn in tms if v not in pn})
        t_false = list({(pp, pn - {v}) for pp, pn in tms if v not in pp})
        return rec(t_true) and rec(t_false)

    return rec(list(set(terms)))


def is_tautology(f: PropFormula) -> bool:
    """Tautology by complete assignment-splitting over the DNF terms."""
    return taut_dnf(to_dnf_terms(f))


# ---------------------------------------------------------------------------
# CNF export (refutation convention: DIMACS of the negation)

def _numbering_for(f: PropFormula, lang: Language, n: int, unary: bool) -> dict:
    return unary_numbering(lang, n) if unary else key_numbering(lang, n)


def export_cnf(
    f: PropFormula,
    lang: Language,
    n: int,
    mode: str = "direct",
    unary: bool | None = None,
) -> str:
    """DIMACS of the negation of f.

    direct: requires f to be a disjunction of conjunctions of literals after
    simplification (bounded distribution is attempted); the negation is then
    a CNF over the canonical key numbering.  tseitin: total; emits an
    equisatisfiable CNF for the negation with auxiliary variables numbered
    above the key space.  A formula equal to the constant 1 exports as the
    single empty clause (its negation is unsatisfiable); the constant 0
    exports as an empty clause set.
    """
    if unary is None:
        keys = prop_vars(f)
        unary = any(isinstance(k, FunGraphKey) for k in keys)
    numbering = _numbering_for(f, lang, n, unary)
    nvars = len(numbering)
    header = [
        "c negation of the given formula (refutation convention):",
        "c the formula is a tautology iff this CNF is unsatisfiable",
        f"c variables 1..{nvars} follow the canonical {'unary' if unary else 'binary'} key order",
    ]

    if mode == "direct":
        g = flatten(simplify_constants(f))
        if not is_literal_dnf(g):
            try:
                terms = to_dnf_terms(g)
            except NotDNF as e:
                raise ContractError(f"direct mode needs a DNF after simplification: {e}")
        else:
            terms = to_dnf_terms(g)
        if terms == [(frozenset(), frozenset())]:
            clauses = [[]]  # negation of constant 1: the empty clause
        else:
            clauses = []
            for pos, neg in terms:
                clause = [-numbering[k] for k in sorted(pos, key=lambda k: numbering[k])] + [
                    numbering[k] for k in sorted(neg, key=lambda k: numbering[k])
                ]
                clauses.append(clause)
        lines = header + [f"p cnf {nvars} {len(clauses)}"]
        for cl in clauses:
            lines.append(" ".join([str(x) for x in cl] + ["0"]))
        return "\n".join(lines) + "\n"

    if mode != "tseitin":
        raise ContractError(f"unknown CNF mode {mode!r}")

    g = flatten(simplify_constants(pneg(f)))
    clauses: list[list[int]] = []
    aux = [nvars]

    def var_of(h) -> int:
        # Returns a DIMACS literal whose truth equals h.
        if isinstance(h, PLit):
            v = numbering[h.key]
            return v if h.positive else -v
        if isinstance(h, PConst):
            aux[0] += 1
            w = aux[0]
            clauses.append([w] if h.value else [-w])
            return w
        kids = [var_of(c) for c in h.children]
        aux[0] += 1
        w = aux[0]
        if isinstance(h, PAnd):
            for k in kids:
                clauses.append([-w, k])
            clauses.append([w] + [-k for k in kids])
        else:
            clauses.append([-w] + kids)
            for k in kids:
                clauses.append([w, -k])
        return w

    if isinstance(g, PConst):
        lines = header + ([f"p cnf {nvars} 1", "0"] if g.value == 0 else [f"p cnf {nvars} 0"])
        return "\n".join(lines) + "\n"
    root = var_of(g)
    clauses.append([root])
    lines = header + [f"p cnf {aux[0]} {len(clauses)}"]
    for cl in clauses:
        lines.append(" ".join([str(x) for x in cl] + ["0"]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Assignments from structures and oracles

def assignment_from_oracle(lang: Language, n: int, alpha) -> set:
    """The set of true binary keys under a full oracle."""
    from finprin.encoding import relevant_elements

    return {k for k in relevant_elements(lang, n) if alpha.member(k)}


def assignment_from_unary(keys: set) -> set:
    return set(keys)
