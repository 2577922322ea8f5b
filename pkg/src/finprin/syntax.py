"""Signatures, basic sentences, the principle DSL, Herbrandization, size metrics.

A *basic* sentence is an existential sentence whose matrix is a disjunction of
conjunctions of flat literals:

    R(u...), !R(u...), f(u...) = v, u = v, u != v

with variable arguments only.  Builtin support is limited to the natural
order ``<`` on the universe [n] and numeral constants; both are evaluated,
never stored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union


class SyntaxError_(Exception):
    """DSL or well-formedness error; carries line/column when known."""

    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        if line is not None:
            msg = f"{line}:{col}: {msg}"
        super().__init__(msg)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Languages

FUN = "fun"
REL = "rel"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str  # FUN or REL
    arity: int

    def __post_init__(self):
        if self.kind not in (FUN, REL):
            raise SyntaxError_(f"bad symbol kind {self.kind!r}")
        if self.arity < 0:
            raise SyntaxError_(f"negative arity for {self.name}")


@dataclass(frozen=True)
class Language:
    """A finite signature plus optional builtins (order, numerals)."""

    symbols: tuple[Symbol, ...] = ()
    order: bool = False              # builtin < on [n]
    numerals: tuple[int, ...] = ()   # builtin numeral constants in use

    def __post_init__(self):
        names = [s.name for s in self.symbols]
        if len(set(names)) != len(names):
            raise SyntaxError_("duplicate symbol names in language")

    def symbol(self, name: str) -> Symbol | None:
        for s in self.symbols:
            if s.name == name:
                return s
        return None

    @property
    def functions(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.kind == FUN)

    @property
    def relations(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.kind == REL)

    def r_L(self) -> int:
        """1 + max arity, the per-cell active-point bound."""
        if not self.symbols:
            return 1
        return 1 + max(s.arity for s in self.symbols)

    def extend(self, extra: Iterable[Symbol]) -> "Language":
        return Language(self.symbols + tuple(extra), self.order, self.numerals)


def language(spec: str, order: bool = False, numerals: Iterable[int] = ()) -> Language:
    """Build a Language from a compact spec like ``"f/1 fun, c/0 fun"``."""
    syms = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        head, kind = part.rsplit(None, 1)
        name, ar = head.split("/")
        syms.append(Symbol(name.strip(), kind.strip(), int(ar)))
    return Language(tuple(syms), order=order, numerals=tuple(numerals))


# ---------------------------------------------------------------------------
# Literals and basic sentences

@dataclass(frozen=True)
class RelLit:
    """R(args) or !R(args); name "<" is the builtin order."""

    name: str
    args: tuple[str, ...]
    positive: bool = True


@dataclass(frozen=True)
class FunLit:
    """f(args) = value; a numeral literal has name str(k) and no args."""

    name: str
    args: tuple[str, ...]
    value: str


@dataclass(frozen=True)
class EqLit:
    left: str
    right: str
    positive: bool = True


Literal = Union[RelLit, FunLit, EqLit]


def _literal_vars(lit: Literal) -> tuple[str, ...]:
    if isinstance(lit, RelLit):
        return lit.args
    if isinstance(lit, FunLit):
        return lit.args + (lit.value,)
    return (lit.left, lit.right)


def _is_numeral(name: str) -> bool:
    return name.isdigit()


@dataclass(frozen=True)
class BasicSentence:
    language: Language
    exist_vars: tuple[str, ...]
    matrix: tuple[tuple[Literal, ...], ...]
    name: str = "principle"

    def __post_init__(self):
        if not self.matrix or any(not d for d in self.matrix):
            raise SyntaxError_("matrix must be a nonempty DNF of nonempty conjunctions")
        if len(set(self.exist_vars)) != len(self.exist_vars):
            raise SyntaxError_("duplicate existential variables")
        declared = set(self.exist_vars)
        for disj in self.matrix:
            for lit in disj:
                self._check_literal(lit, declared)

    def _check_literal(self, lit: Literal, declared: set[str]) -> None:
        lang = self.language
        for v in _literal_vars(lit):
            if v not in declared:
                raise SyntaxError_(f"variable {v!r} not among existential variables")
        if isinstance(lit, RelLit):
            if lit.name == "<":
                if not lang.order:
                    raise SyntaxError_("order literal but language lacks builtin <")
                if len(lit.args) != 2:
                    raise SyntaxError_("< takes two arguments")
                if not lit.positive:
                    raise SyntaxError_("builtin < may only occur positively")
                return
            sym = lang.symbol(lit.name)
            if sym is None:
                raise SyntaxError_(f"unknown symbol {lit.name!r}")
            if sym.kind != REL:
                raise SyntaxError_(f"{lit.name} is not a relation symbol")
            if sym.arity != len(lit.args):
                raise SyntaxError_(f"arity mismatch for {lit.name}")
        elif isinstance(lit, FunLit):
            if _is_numeral(lit.name):
                if int(lit.name) not in lang.numerals:
                    raise SyntaxError_(f"numeral {lit.name} not declared in language")
                if lit.args:
                    raise SyntaxError_("numeral literals take no arguments")
                return
            sym = lang.symbol(lit.name)
            if sym is None:
                raise SyntaxError_(f"unknown symbol {lit.name!r}")
            if sym.kind != FUN:
                raise SyntaxError_(f"{lit.name} is not a function symbol")
            if sym.arity != len(lit.args):
                raise SyntaxError_(f"arity mismatch for {lit.name}")

    def variables_of_disjunct(self, i: int) -> tuple[str, ...]:
        seen: list[str] = []
        for lit in self.matrix[i]:
            for v in _literal_vars(lit):
                if v not in seen:
                    seen.append(v)
        return tuple(seen)


# ---------------------------------------------------------------------------
# First-order sentences (for Herbrandization input and 3-valued evaluation)

@dataclass(frozen=True)
class FoVar:
    name: str


@dataclass(frozen=True)
class FoNum:
    """A numeral: a parameter from [n] or a builtin numeral constant."""

    value: int


@dataclass(frozen=True)
class FoApp:
    name: str
    args: tuple["Term", ...]


Term = Union[FoVar, FoNum, FoApp]


@dataclass(frozen=True)
class FoRel:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class FoEq:
    left: Term
    right: Term


@dataclass(frozen=True)
class FoNot:
    sub: "FirstOrderSentence"


@dataclass(frozen=True)
class FoAnd:
    left: "FirstOrderSentence"
    right: "FirstOrderSentence"


@dataclass(frozen=True)
class FoOr:
    left: "FirstOrderSentence"
    right: "FirstOrderSentence"


@dataclass(frozen=True)
class FoForall:
    var: str
    body: "FirstOrderSentence"


@dataclass(frozen=True)
class FoExists:
    var: str
    body: "FirstOrderSentence"


FirstOrderSentence = Union[FoRel, FoEq, FoNot, FoAnd, FoOr, FoForall, FoExists]


def free_vars(phi: FirstOrderSentence) -> set[str]:
    def term_vars(t: Term) -> set[str]:
        if isinstance(t, FoVar):
            return {t.name}
        if isinstance(t, FoApp):
            out: set[str] = set()
            for a in t.args:
                out |= term_vars(a)
            return out
        return set()

    if isinstance(phi, FoRel):
        out: set[str] = set()
        for a in phi.args:
            out |= term_vars(a)
        return out
    if isinstance(phi, FoEq):
        return term_vars(phi.left) | term_vars(phi.right)
    if isinstance(phi, FoNot):
        return free_vars(phi.sub)
    if isinstance(phi, (FoAnd, FoOr)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (FoForall, FoExists)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(phi)


def formula_size(phi) -> int:
    """Node count: occurrences of atoms and of the symbols &, |, !, exists, forall."""
    if isinstance(phi, BasicSentence):
        return formula_size(to_first_order(phi))
    if isinstance(phi, (FoRel, FoEq)):
        return 1
    if isinstance(phi, FoNot):
        return 1 + formula_size(phi.sub)
    if isinstance(phi, (FoAnd, FoOr)):
        return 1 + formula_size(phi.left) + formula_size(phi.right)
    if isinstance(phi, (FoForall, FoExists)):
        return 1 + formula_size(phi.body)
    raise TypeError(phi)


def _literal_to_fo(lit: Literal) -> FirstOrderSentence:
    if isinstance(lit, RelLit):
        atom = FoRel(lit.name, tuple(FoVar(v) for v in lit.args))
        return atom if lit.positive else FoNot(atom)
    if isinstance(lit, FunLit):
        if _is_numeral(lit.name):
            lhs: Term = FoNum(int(lit.name))
        else:
            lhs = FoApp(lit.name, tuple(FoVar(v) for v in lit.args))
        return FoEq(lhs, FoVar(lit.value))
    atom = FoEq(FoVar(lit.left), FoVar(lit.right))
    return atom if lit.positive else FoNot(atom)


def to_first_order(s: BasicSentence) -> FirstOrderSentence:
    """The sentence tree of a basic sentence (right-nested conjunctions)."""

    def conj(lits):
        node = _literal_to_fo(lits[-1])
        for lit in reversed(lits[:-1]):
            node = FoAnd(_literal_to_fo(lit), node)
        return node

    node = conj(s.matrix[-1])
    for d in reversed(s.matrix[:-1]):
        node = FoOr(conj(d), node)
    for v in reversed(s.exist_vars):
        node = FoExists(v, node)
    return node


# ---------------------------------------------------------------------------
# Herbrandization

def herbrandize(phi: FirstOrderSentence, lang: Language, name: str = "principle") -> BasicSentence:
    """Turn a first-order sentence into an equivalid basic sentence.

    Universal quantifiers are replaced by fresh function symbols applied to
    the existential variables in scope, the matrix is put in DNF, and nested
    terms are flattened through fresh existential variables; a negated
    function equation !f(u)=v becomes exists y (f(u)=y & y!=v).
    """
    if free_vars(phi):
        raise SyntaxError_("herbrandize requires a closed sentence")

    fresh_syms: list[Symbol] = []
    counter = [0]
    taken = {s.name for s in lang.symbols}

    def fresh_fun(arity: int) -> str:
        while True:
            nm = f"h{counter[0]}"
            counter[0] += 1
            if nm not in taken:
                taken.add(nm)
                fresh_syms.append(Symbol(nm, FUN, arity))
                return nm

    def nnf(f: FirstOrderSentence, neg: bool) -> FirstOrderSentence:
        if isinstance(f, (FoRel, FoEq)):
            return FoNot(f) if neg else f
        if isinstance(f, FoNot):
            return nnf(f.sub, not neg)
        if isinstance(f, FoAnd):
            a, b = nnf(f.left, neg), nnf(f.right, neg)
            return FoOr(a, b) if neg else FoAnd(a, b)
        if isinstance(f, FoOr):
            a, b = nnf(f.left, neg), nnf(f.right, neg)
            return FoAnd(a, b) if neg else FoOr(a, b)
        if isinstance(f, FoForall):
            body = nnf(f.body, neg)
            return FoExists(f.var, body) if neg else FoForall(f.var, body)
        if isinstance(f, FoExists):
            body = nnf(f.body, neg)
            return FoForall(f.var, body) if neg else FoExists(f.var, body)
        raise TypeError(f)

    # Replace universal variables by fresh-function terms of the existential
    # variables in scope; collect the existential prefix.
    exist_order: list[str] = []

    def strip(f: FirstOrderSentence, scope: tuple[str, ...], subst: dict[str, Term]) -> FirstOrderSentence:
        if isinstance(f, FoExists):
            v = f.var
            if v in exist_order or v in subst:
                v2 = v
                while v2 in exist_order or v2 in subst:
                    v2 += "_"
                return strip(_rename(f.body, f.var, v2), scope, subst)
            exist_order.append(v)
            return strip(f.body, scope + (v,), subst)
        if isinstance(f, FoForall):
            nm = fresh_fun(len(scope))
            term = FoApp(nm, tuple(FoVar(v) for v in scope))
            return strip(f.body, scope, {**subst, f.var: term})
        if isinstance(f, FoAnd):
            return FoAnd(strip(f.left, scope, subst), strip(f.right, scope, subst))
        if isinstance(f, FoOr):
            return FoOr(strip(f.left, scope, subst), strip(f.right, scope, subst))
        if isinstance(f, FoNot):
            return FoNot(strip(f.sub, scope, subst))
        if isinstance(f, (FoRel, FoEq)):
            return _subst_atom(f, subst)
        raise TypeError(f)

    matrix_fo = strip(nnf(phi, False), (), {})

    # DNF over (possibly negated) atoms.
    def dnf(f) -> list[list[FirstOrderSentence]]:
        if isinstance(f, FoOr):
            return dnf(f.left) + dnf(f.right)
        if isinstance(f, FoAnd):
            return [a + b for a in dnf(f.left) for b in dnf(f.right)]
        return [[f]]

    # Flatten one conjunction of atoms into basic literals.
    var_counter = [0]

    def fresh_var() -> str:
        while True:
            nm = f"w{var_counter[0]}"
            var_counter[0] += 1
            if nm not in exist_order:
                exist_order.append(nm)
                return nm

    def flatten_term(t: Term, out: list[Literal]) -> str:
        if isinstance(t, FoVar):
            return t.name
        if isinstance(t, FoNum):
            v = fresh_var()
            out.append(FunLit(str(t.value), (), v))
            return v
        args = tuple(flatten_term(a, out) for a in t.args)
        v = fresh_var()
        out.append(FunLit(t.name, args, v))
        return v

    def flatten_atom(f: FirstOrderSentence, out: list[Literal]) -> None:
        neg = False
        if isinstance(f, FoNot):
            neg, f = True, f.sub
        if isinstance(f, FoRel):
            args = tuple(flatten_term(a, out) for a in f.args)
            out.append(RelLit(f.name, args, not neg))
            return
        if isinstance(f, FoEq):
            l, r = f.left, f.right
            # Keep f(vars)=var literals intact when already flat and positive.
            if not neg and isinstance(l, FoApp) and all(isinstance(a, FoVar) for a in l.args) and isinstance(r, FoVar):
                out.append(FunLit(l.name, tuple(a.name for a in l.args), r.name))
                return
            if not neg and isinstance(r, FoApp) and all(isinstance(a, FoVar) for a in r.args) and isinstance(l, FoVar):
                out.append(FunLit(r.name, tuple(a.name for a in r.args), l.name))
                return
            lv = flatten_term(l, out)
            rv = flatten_term(r, out)
            if isinstance(l, FoVar) and isinstance(r, FoVar):
                out.append(EqLit(lv, rv, not neg))
            elif neg:
                out.append(EqLit(lv, rv, False))
            else:
                out.append(EqLit(lv, rv, True))
        elif isinstance(f, FoNot):
            raise SyntaxError_("double negation survived NNF")
        else:
            raise SyntaxError_("quantifier inside matrix after Herbrandization")

    disjuncts: list[tuple[Literal, ...]] = []
    for conj in dnf(matrix_fo):
        lits: list[Literal] = []
        for atom in conj:
            flatten_atom(atom, lits)
        # Drop trivially true equalities u=u; a conjunct with u!=u is dropped whole.
        lits2 = []
        dead = False
        for lit in lits:
            if isinstance(lit, EqLit) and lit.left == lit.right:
                if lit.positive:
                    continue
                dead = True
                break
            lits2.append(lit)
        if dead:
            continue
        if not lits2:
            # Conjunction of trivia only: represent as x_=x_ over a fresh var.
            v = fresh_var()
            lits2 = [EqLit(v, v, True)]
        disjuncts.append(tuple(lits2))
    if not disjuncts:
        raise SyntaxError_("sentence has an unsatisfiable matrix after flattening")

    used = set()
    for d in disjuncts:
        for lit in d:
            used |= set(_literal_vars(lit))
    evars = tuple(v for v in exist_order if v in used)
    if not evars:
        # No variables at all (matrix over constants only was eliminated).
        evars = ("x",)
        disjuncts = [tuple([EqLit("x", "x", True)])] if disjuncts == [] else disjuncts

    new_numerals = set(lang.numerals)
    for d in disjuncts:
        for lit in d:
            if isinstance(lit, FunLit) and _is_numeral(lit.name):
                new_numerals.add(int(lit.name))
    out_lang = Language(lang.symbols + tuple(fresh_syms), lang.order, tuple(sorted(new_numerals)))
    return BasicSentence(out_lang, evars, tuple(disjuncts), name=name)


def _rename(f: FirstOrderSentence, old: str, new: str) -> FirstOrderSentence:
    def rt(t: Term) -> Term:
        if isinstance(t, FoVar):
            return FoVar(new) if t.name == old else t
        if isinstance(t, FoApp):
            return FoApp(t.name, tuple(rt(a) for a in t.args))
        return t

    if isinstance(f, FoRel):
        return FoRel(f.name, tuple(rt(a) for a in f.args))
    if isinstance(f, FoEq):
        return FoEq(rt(f.left), rt(f.right))
    if isinstance(f, FoNot):
        return FoNot(_rename(f.sub, old, new))
    if isinstance(f, FoAnd):
        return FoAnd(_rename(f.left, old, new), _rename(f.right, old, new))
    if isinstance(f, FoOr):
        return FoOr(_rename(f.left, old, new), _rename(f.right, old, new))
    if isinstance(f, FoForall):
        if f.var == old:
            return f
        return FoForall(f.var, _rename(f.body, old, new))
    if isinstance(f, FoExists):
        if f.var == old:
            return f
        return FoExists(f.var, _rename(f.body, old, new))
    raise TypeError(f)


def _subst_atom(f: FirstOrderSentence, subst: dict[str, Term]) -> FirstOrderSentence:
    def st(t: Term) -> Term:
        if isinstance(t, FoVar):
            return subst.get(t.name, t)
        if isinstance(t, FoApp):
            return FoApp(t.name, tuple(st(a) for a in t.args))
        return t

    if isinstance(f, FoRel):
        return FoRel(f.name, tuple(st(a) for a in f.args))
    if isinstance(f, FoEq):
        return FoEq(st(f.left), st(f.right))
    raise TypeError(f)


def is_basic_shape(s: BasicSentence) -> bool:
    """Shape predicate used by the property suite; construction enforces it."""
    try:
        BasicSentence(s.language, s.exist_vars, s.matrix, s.name)
        return True
    except SyntaxError_:
        return False


# ---------------------------------------------------------------------------
# DSL
#
# principle   := "principle" IDENT "{" "language" "{" sigdecl ("," sigdecl)* "}"
#                "exists" IDENT+ "." dnf "}"
# sigdecl     := IDENT "/" NAT ("fun"|"rel") | "builtin" "<"
# dnf         := conj ("|" conj)*
# conj        := "(" lit ("&" lit)* ")" | lit
# lit         := IDENT "(" IDENT ("," IDENT)* ")"          relation atom
#              | "!" IDENT "(" IDENT ("," IDENT)* ")"      negated relation atom
#              | IDENT "(" IDENT ("," IDENT)* ")" "=" IDENT  function literal
#              | IDENT "=" IDENT | IDENT "!=" IDENT          equality literals;
#                a declared arity-0 symbol or numeral on the left makes a
#                function literal instead
#              | IDENT "<" IDENT                             builtin order
#
# An empty argument list is written without parentheses (constants appear as
# "c = u").  Numerals are accepted wherever an arity-0 function may appear.

_PUNCT = ("!=", "principle", "language", "builtin", "exists")


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}"


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    line, col = 1, 1
    i = 0
    while i < len(src):
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < len(src) and src[i] != "\n":
                i += 1
            continue
        if src.startswith("!=", i):
            toks.append(_Tok("op", "!=", line, col))
            i += 2
            col += 2
            continue
        if c in "{}().,|&=!/<":
            toks.append(_Tok("op", c, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < len(src) and src[j].isdigit():
                j += 1
            toks.append(_Tok("num", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(src) and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            word = src[i:j]
            kind = "kw" if word in ("principle", "language", "builtin", "exists", "fun", "rel") else "ident"
            toks.append(_Tok(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise SyntaxError_(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            raise SyntaxError_(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def ident(self) -> str:
        t = self.next()
        if t.kind != "ident":
            raise SyntaxError_(f"expected identifier, found {t.text!r}", t.line, t.col)
        return t.text


def parse_principle(text: str) -> BasicSentence:
    """Parse DSL source into a BasicSentence; rejects nested terms."""
    p = _Parser(_tokenize(text))
    p.expect("principle")
    name = p.ident()
    p.expect("{")
    p.expect("language")
    p.expect("{")
    syms: list[Symbol] = []
    order = False
    while p.peek().text != "}":
        t = p.peek()
        if t.text == "builtin":
            p.next()
            p.expect("<")
            order = True
        else:
            nm = p.ident()
            p.expect("/")
            ar = p.next()
            if ar.kind != "num":
                raise SyntaxError_("expected arity", ar.line, ar.col)
            kind = p.next()
            if kind.text not in (FUN, REL):
                raise SyntaxError_("expected 'fun' or 'rel'", kind.line, kind.col)
            syms.append(Symbol(nm, kind.text, int(ar.text)))
        if p.peek().text == ",":
            p.next()
            continue
        break
    p.expect("}")
    p.expect("exists")
    evars: list[str] = []
    while p.peek().kind == "ident":
        evars.append(p.next().text)
    if not evars:
        t = p.peek()
        raise SyntaxError_("expected at least one existential variable", t.line, t.col)
    p.expect(".")

    symtab = {s.name: s for s in syms}
    numerals: set[int] = set()

    def parse_var() -> str:
        t = p.peek()
        nm = p.ident()
        if nm in symtab:
            raise SyntaxError_("nested term: arguments must be variables", t.line, t.col)
        return nm

    def parse_args() -> tuple[str, ...]:
        p.expect("(")
        args = [parse_var()]
        while p.peek().text == ",":
            p.next()
            args.append(parse_var())
        p.expect(")")
        return tuple(args)

    def parse_lit() -> Literal:
        t = p.peek()
        if t.text == "!":
            p.next()
            nm = p.ident()
            args = parse_args()
            return RelLit(nm, args, False)
        if t.kind == "num":
            p.next()
            numerals.add(int(t.text))
            p.expect("=")
            return FunLit(t.text, (), p.ident())
        nm_tok = p.next()
        if nm_tok.kind != "ident":
            raise SyntaxError_(f"expected literal, found {nm_tok.text!r}", nm_tok.line, nm_tok.col)
        nm = nm_tok.text
        t = p.peek()
        if t.text == "(":
            args = parse_args()
            if p.peek().text == "=":
                p.next()
                val_tok = p.next()
                if val_tok.kind == "ident" and val_tok.text not in symtab:
                    return FunLit(nm, args, val_tok.text)
                raise SyntaxError_("nested term: function value must be a variable",
                                   val_tok.line, val_tok.col)
            return RelLit(nm, args, True)
        if t.text == "=":
            p.next()
            rhs = p.ident()
            sym = symtab.get(nm)
            if sym is not None and sym.kind == FUN and sym.arity == 0:
                return FunLit(nm, (), rhs)
            return EqLit(nm, rhs, True)
        if t.text == "!=":
            p.next()
            return EqLit(nm, p.ident(), False)
        if t.text == "<":
            p.next()
            return RelLit("<", (nm, p.ident()), True)
        raise SyntaxError_(f"cannot parse literal at {t.text!r}", t.line, t.col)

    def parse_conj() -> tuple[Literal, ...]:
        # A literal never starts with "(", so a leading "(" opens a conjunction.
        if p.peek().text == "(":
            p.expect("(")
            lits = [parse_lit()]
            while p.peek().text == "&":
                p.next()
                lits.append(parse_lit())
            p.expect(")")
            return tuple(lits)
        return (parse_lit(),)

    matrix = [parse_conj()]
    while p.peek().text == "|":
        p.next()
        matrix.append(parse_conj())
    p.expect("}")
    t = p.peek()
    if t.kind != "eof":
        raise SyntaxError_(f"trailing input {t.text!r}", t.line, t.col)

    lang = Language(tuple(syms), order=order, numerals=tuple(sorted(numerals)))
    return BasicSentence(lang, tuple(evars), tuple(matrix), name=name)


def render_literal(lit: Literal) -> str:
    if isinstance(lit, RelLit):
        if lit.name == "<":
            return f"{lit.args[0]} < {lit.args[1]}"
        body = f"{lit.name}({', '.join(lit.args)})"
        return body if lit.positive else "!" + body
    if isinstance(lit, FunLit):
        if not lit.args:
            return f"{lit.name} = {lit.value}"
        return f"{lit.name}({', '.join(lit.args)}) = {lit.value}"
    op = "=" if lit.positive else "!="
    return f"{lit.left} {op} {lit.right}"


def render_principle(s: BasicSentence) -> str:
    """Canonical DSL text; parse_principle inverts it structurally."""
    sig = ", ".join(f"{x.name}/{x.arity} {x.kind}" for x in s.language.symbols)
    if s.language.order:
        sig = sig + ", builtin <" if sig else "builtin <"
    lines = [f"principle {s.name} {{"]
    lines.append(f"  language {{ {sig} }}")
    lines.append(f"  exists {' '.join(s.exist_vars)} .")
    parts = []
    for disj in s.matrix:
        body = " & ".join(render_literal(l) for l in disj)
        parts.append(f"({body})" if len(disj) > 1 else body)
    lines.append("    " + "\n    | ".join(parts))
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON serialization (stable field order)

def sentence_to_json(s: BasicSentence) -> str:
    def lit_obj(lit: Literal):
        if isinstance(lit, RelLit):
            return {"kind": "rel", "name": lit.name, "args": list(lit.args), "positive": lit.positive}
        if isinstance(lit, FunLit):
            return {"kind": "fun", "name": lit.name, "args": list(lit.args), "value": lit.value}
        return {"kind": "eq", "left": lit.left, "right": lit.right, "positive": lit.positive}

    obj = {
        "name": s.name,
        "language": {
            "symbols": [[x.name, x.kind, x.arity] for x in s.language.symbols],
            "order": s.language.order,
            "numerals": list(s.language.numerals),
        },
        "exists": list(s.exist_vars),
        "matrix": [[lit_obj(l) for l in d] for d in s.matrix],
    }
    return json.dumps(obj, indent=2)


def sentence_from_json(text: str) -> BasicSentence:
    obj = json.loads(text)
    lang = Language(
        tuple(Symbol(n, k, a) for n, k, a in obj["language"]["symbols"]),
        order=obj["language"]["order"],
        numerals=tuple(obj["language"]["numerals"]),
    )

    def lit(o) -> Literal:
        if o["kind"] == "rel":
            return RelLit(o["name"], tuple(o["args"]), o["positive"])
        if o["kind"] == "fun":
            return FunLit(o["name"], tuple(o["args"]), o["value"])
        return EqLit(o["left"], o["right"], o["positive"])

    matrix = tuple(tuple(lit(l) for l in d) for d in obj["matrix"])
    return BasicSentence(lang, tuple(obj["exists"]), matrix, name=obj["name"])
