"""Quantifier-free interpretations between principles and their reductions.

An interpretation gives, for every target symbol, a quantifier-free formula
over the source language (with a Herbrand term list for function symbols).
Applying it to a total source structure yields a same-universe target
structure; pulling a target witness back yields a source witness, realizing
a many-one reduction between the associated search problems.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from finprin.partial import (
    ContractError,
    PartialStructure,
    all_total_structures,
    literal_value,
    V1,
    verifies_witness,
)
from finprin.syntax import FUN, REL, BasicSentence, Language

from finprin.encoding import FunBitKey, RelKey, len_bits


# ---------------------------------------------------------------------------
# Quantifier-free formulas over a language (variables x0, x1, ..., y)

@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TApp:
    name: str
    args: tuple = ()


QTerm = Union[TVar, TApp]


@dataclass(frozen=True)
class ARel:
    name: str
    args: tuple


@dataclass(frozen=True)
class AEq:
    left: QTerm
    right: QTerm


@dataclass(frozen=True)
class QNot:
    sub: "QF"


@dataclass(frozen=True)
class QAnd:
    left: "QF"
    right: "QF"


@dataclass(frozen=True)
class QOr:
    left: "QF"
    right: "QF"


QF = Union[ARel, AEq, QNot, QAnd, QOr]


def qand(*parts: QF) -> QF:
    node = parts[-1]
    for p in reversed(parts[:-1]):
        node = QAnd(p, node)
    return node


def qor(*parts: QF) -> QF:
    node = parts[-1]
    for p in reversed(parts[:-1]):
        node = QOr(p, node)
    return node


def eval_term(struct, t: QTerm, env: dict[str, int]) -> int:
    if isinstance(t, TVar):
        return env[t.name]
    vals = [eval_term(struct, a, env) for a in t.args]
    v = struct.fun_value(t.name, vals)
    if v is None:
        raise ContractError(f"undefined cell {t.name}{tuple(vals)} in a total-structure context")
    return v


def eval_formula(struct, f: QF, env: dict[str, int]) -> bool:
    if isinstance(f, ARel):
        vals = [eval_term(struct, a, env) for a in f.args]
        return bool(struct.rel_value(f.name, vals))
    if isinstance(f, AEq):
        return eval_term(struct, f.left, env) == eval_term(struct, f.right, env)
    if isinstance(f, QNot):
        return not eval_formula(struct, f.sub, env)
    if isinstance(f, QAnd):
        return eval_formula(struct, f.left, env) and eval_formula(struct, f.right, env)
    if isinstance(f, QOr):
        return eval_formula(struct, f.left, env) or eval_formula(struct, f.right, env)
    raise TypeError(f)


# Generator twins used by decision trees probing a binary code.  The cache
# (shared within one tree run) keeps repeated reads of the same cell from
# consuming extra queries; replay determinism is unaffected.

def eval_term_gen(t: QTerm, env: dict[str, int], lang: Language, n: int, cache=None):
    if isinstance(t, TVar):
        return env[t.name]
    vals = []
    for a in t.args:
        v = yield from eval_term_gen(a, env, lang, n, cache)
        vals.append(v)
    cell = (FUN, t.name, tuple(vals))
    if cache is not None and cell in cache:
        return cache[cell]
    acc = 0
    for i in range(len_bits(n)):
        bit = yield FunBitKey(t.name, tuple(vals), i)
        if bit:
            acc |= 1 << i
    out = min(acc, n - 1)
    if cache is not None:
        cache[cell] = out
    return out


def eval_formula_gen(f: QF, env: dict[str, int], lang: Language, n: int, cache=None):
    if isinstance(f, ARel):
        vals = []
        for a in f.args:
            v = yield from eval_term_gen(a, env, lang, n, cache)
            vals.append(v)
        cell = (REL, f.name, tuple(vals))
        if cache is not None and cell in cache:
            return cache[cell]
        bit = yield RelKey(f.name, tuple(vals))
        if cache is not None:
            cache[cell] = bool(bit)
        return bool(bit)
    if isinstance(f, AEq):
        lv = yield from eval_term_gen(f.left, env, lang, n, cache)
        rv = yield from eval_term_gen(f.right, env, lang, n, cache)
        return lv == rv
    if isinstance(f, QNot):
        v = yield from eval_formula_gen(f.sub, env, lang, n, cache)
        return not v
    if isinstance(f, QAnd):
        v = yield from eval_formula_gen(f.left, env, lang, n, cache)
        if not v:
            return False
        v = yield from eval_formula_gen(f.right, env, lang, n, cache)
        return v
    if isinstance(f, QOr):
        v = yield from eval_formula_gen(f.left, env, lang, n, cache)
        if v:
            return True
        v = yield from eval_formula_gen(f.right, env, lang, n, cache)
        return v
    raise TypeError(f)


def term_probe_cost(t: QTerm, lang: Language, n: int) -> int:
    if isinstance(t, TVar):
        return 0
    return sum(term_probe_cost(a, lang, n) for a in t.args) + len_bits(n)


def formula_probe_cost(f: QF, lang: Language, n: int) -> int:
    if isinstance(f, ARel):
        return sum(term_probe_cost(a, lang, n) for a in f.args) + 1
    if isinstance(f, AEq):
        return term_probe_cost(f.left, lang, n) + term_probe_cost(f.right, lang, n)
    if isinstance(f, QNot):
        return formula_probe_cost(f.sub, lang, n)
    return formula_probe_cost(f.left, lang, n) + formula_probe_cost(f.right, lang, n)


# ---------------------------------------------------------------------------
# Interpretations

class FunctionalityError(Exception):
    def __init__(self, symbol: str, args: tuple, count: int):
        super().__init__(f"delta_{symbol} defines {count} values on {args}, expected exactly 1")
        self.symbol = symbol
        self.args = args
        self.count = count


@dataclass(frozen=True)
class Interpretation:
    """Family of defining formulas: source structures to target structures.

    Relation deltas use variables x0..x_{ar-1}; function deltas additionally
    use y for the value and carry a Herbrand term list meant to cover it.
    """

    name: str
    source_language: Language
    target_language: Language
    rel_defs: dict[str, QF]
    fun_defs: dict[str, QF]
    herbrand: dict[str, tuple[QTerm, ...]]
    source_name: str = ""
    target_name: str = ""


def identity_interpretation(lang: Language, name: str = "identity") -> Interpretation:
    rel_defs = {}
    fun_defs = {}
    herbrand = {}
    for s in lang.symbols:
        xs = tuple(TVar(f"x{i}") for i in range(s.arity))
        if s.kind == REL:
            rel_defs[s.name] = ARel(s.name, xs)
        else:
            fun_defs[s.name] = AEq(TVar("y"), TApp(s.name, xs))
            herbrand[s.name] = (TApp(s.name, xs),)
    return Interpretation(name, lang, lang, rel_defs, fun_defs, herbrand)


def apply_interpretation(interp: Interpretation, b: PartialStructure) -> PartialStructure:
    """The target structure the interpretation defines inside a total source."""
    if not b.is_total():
        raise ContractError("apply_interpretation needs a total source structure")
    if b.language != interp.source_language:
        raise ContractError("source language mismatch")
    n = b.n
    out = PartialStructure(interp.target_language, n)
    for s in interp.target_language.symbols:
        if s.kind == REL:
            delta = interp.rel_defs[s.name]
            table = out.rels[s.name]
            for idx, args in _enumerate_tuples(n, s.arity):
                env = {f"x{i}": v for i, v in enumerate(args)}
                table[idx] = 1 if eval_formula(b, delta, env) else 0
        else:
            delta = interp.fun_defs[s.name]
            table = out.funs[s.name]
            for idx, args in _enumerate_tuples(n, s.arity):
                env = {f"x{i}": v for i, v in enumerate(args)}
                values = [y for y in range(n) if eval_formula(b, delta, {**env, "y": y})]
                if len(values) != 1:
                    raise FunctionalityError(s.name, args, len(values))
                table[idx] = values[0]
    return out


def _enumerate_tuples(n: int, arity: int):
    for idx in range(n ** arity):
        args = []
        rest = idx
        for _ in range(arity):
            args.append(rest % n)
            rest //= n
        yield idx, tuple(reversed(args))


# ---------------------------------------------------------------------------
# The four builtin interpretations

def builtin_interpretation(name: str) -> Interpretation:
    key = name.strip().upper().replace(" ", "").replace("->", "_TO_")
    builders = {
        "HAP_TO_HDP": _hap_to_hdp,
        "HDP_TO_HOP": _hdp_to_hop,
        "IND_TO_HOP": _ind_to_hop,
        "IND_TO_PHP": _ind_to_php,
    }
    if key not in builders:
        raise KeyError(f"unknown interpretation {name!r}; known: {', '.join(builders)}")
    return builders[key]()


def _langs(src: str, tgt: str):
    from finprin import catalog

    return catalog.builtin(src).sentence.language, catalog.builtin(tgt).sentence.language


def _hap_to_hdp() -> Interpretation:
    src, tgt = _langs("HAP", "HDP")
    x0, x1, y = TVar("x0"), TVar("x1"), TVar("y")
    zero, one = TApp("zero"), TApp("one")
    # x0 is a proper subelement of x1: meet(x0, x1) = x0 and x0 != x1.
    prec = qand(AEq(TApp("meet", (x0, x1)), x0), QNot(AEq(x0, x1)))
    between = TApp("join", (x0, TApp("f", (TApp("meet", (x1, TApp("compl", (x0,)))),))))
    delta_b = qor(qand(AEq(y, between), prec), qand(AEq(y, zero), QNot(prec)))
    return Interpretation(
        "HAP_to_HDP", src, tgt,
        rel_defs={"prec": prec},
        fun_defs={"b": delta_b, "zero": AEq(y, zero), "one": AEq(y, one)},
        herbrand={"b": (between, zero), "zero": (zero,), "one": (one,)},
        source_name="HAP", target_name="HDP",
    )


def _in01(x: QTerm) -> QF:
    zero, one = TApp("zero"), TApp("one")
    return qor(AEq(x, zero), AEq(x, one), qand(ARel("prec", (zero, x)), ARel("prec", (x, one))))


def _hdp_to_hop() -> Interpretation:
    src, tgt = _langs("HDP", "HOP")
    x0, x1, y = TVar("x0"), TVar("x1"), TVar("y")
    one = TApp("one")
    delta_prec = qor(
        qand(_in01(x0), _in01(x1), ARel("prec", (x0, x1))),
        qand(QNot(_in01(x1)), _in01(x0)),
    )
    regress = TApp("b", (TApp("zero"), x0))
    delta_f = qor(qand(_in01(x0), AEq(y, regress)), qand(QNot(_in01(x0)), AEq(y, one)))
    return Interpretation(
        "HDP_to_HOP", src, tgt,
        rel_defs={"prec": delta_prec},
        fun_defs={"f": delta_f},
        herbrand={"f": (regress, one)},
        source_name="HDP", target_name="HOP",
    )


def _ind_to_hop() -> Interpretation:
    src, tgt = _langs("IND", "HOP")
    x0, x1, y = TVar("x0"), TVar("x1"), TVar("y")
    delta_prec = qor(
        qand(ARel("P", (x0,)), ARel("P", (x1,)), ARel("prec", (x1, x0))),
        qand(QNot(ARel("P", (x1,))), ARel("P", (x0,))),
    )
    return Interpretation(
        "IND_to_HOP", src, tgt,
        rel_defs={"prec": delta_prec},
        fun_defs={"f": AEq(y, TApp("s", (x0,)))},
        herbrand={"f": (TApp("s", (x0,)),)},
        source_name="IND", target_name="HOP",
    )


def _ind_to_php() -> Interpretation:
    src, tgt = _langs("IND", "PHP")
    x0, y = TVar("x0"), TVar("y")
    delta_f = qor(
        qand(ARel("P", (x0,)), AEq(y, TApp("s", (x0,)))),
        qand(QNot(ARel("P", (x0,))), AEq(y, x0)),
    )
    return Interpretation(
        "IND_to_PHP", src, tgt,
        rel_defs={},
        fun_defs={"f": delta_f, "c": AEq(y, TApp("min"))},
        herbrand={"f": (TApp("s", (x0,)), x0), "c": (TApp("min"),)},
        source_name="IND", target_name="PHP",
    )


# ---------------------------------------------------------------------------
# Validity checks
#
# "delta_S defines a total functional graph in every source structure and
# some Herbrand candidate witnesses it" is checked exhaustively by a
# read-cone enumeration: evaluation reads source cells lazily, and the
# driver branches over the possible values of each newly read cell.  Every
# total source structure induces exactly one read trace, so checking all
# traces checks all structures while only ever enumerating the cells the
# formulas can see.

class _NeedCell(Exception):
    def __init__(self, cell):
        self.cell = cell


class _LazyStruct:
    def __init__(self, n: int, cells: dict):
        self.n = n
        self.cells = cells

    def fun_value(self, name, args):
        cell = (FUN, name, tuple(args))
        if cell not in self.cells:
            raise _NeedCell(cell)
        return self.cells[cell]

    def rel_value(self, name, args):
        cell = (REL, name, tuple(args))
        if cell not in self.cells:
            raise _NeedCell(cell)
        return self.cells[cell]


@dataclass
class ValidityReport:
    interpretation: str
    n: int
    traces: int
    counterexample: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def check_validity(interp: Interpretation, n: int) -> ValidityReport:
    """Exhaustive functionality and Herbrand-coverage check on [n]."""
    traces = 0
    for s in interp.target_language.functions:
        delta = interp.fun_defs[s.name]
        terms = interp.herbrand.get(s.name, ())
        for _, args in _enumerate_tuples(n, s.arity):
            env = {f"x{i}": v for i, v in enumerate(args)}

            def check(struct) -> Optional[tuple]:
                values = [y for y in range(n) if eval_formula(struct, delta, {**env, "y": y})]
                if len(values) != 1:
                    return (s.name, args, "functionality", len(values))
                covered = any(
                    eval_formula(struct, delta, {**env, "y": eval_term(struct, t, env)})
                    for t in terms
                )
                if not covered:
                    return (s.name, args, "herbrand", values[0])
                return None

            stack = [dict()]
            while stack:
                cells = stack.pop()
                struct = _LazyStruct(n, cells)
                try:
                    bad = check(struct)
                except _NeedCell as need:
                    kind = need.cell[0]
                    domain = range(n) if kind == FUN else range(2)
                    for v in domain:
                        nxt = dict(cells)
                        nxt[need.cell] = v
                        stack.append(nxt)
                    continue
                traces += 1
                if bad is not None:
                    return ValidityReport(interp.name, n, traces, bad)
    return ValidityReport(interp.name, n, traces)


def check_validity_enumerating(interp: Interpretation, n: int) -> ValidityReport:
    """Independent oracle: plain enumeration of all total source structures."""
    count = 0
    for b in all_total_structures(interp.source_language, n):
        count += 1
        for s in interp.target_language.functions:
            delta = interp.fun_defs[s.name]
            terms = interp.herbrand.get(s.name, ())
            for _, args in _enumerate_tuples(n, s.arity):
                env = {f"x{i}": v for i, v in enumerate(args)}
                values = [y for y in range(n) if eval_formula(b, delta, {**env, "y": y})]
                if len(values) != 1:
                    return ValidityReport(interp.name, n, count, (s.name, args, "functionality", len(values)))
                if not any(
                    eval_formula(b, delta, {**env, "y": eval_term(b, t, env)}) for t in terms
                ):
                    return ValidityReport(interp.name, n, count, (s.name, args, "herbrand", values[0]))
    return ValidityReport(interp.name, n, count)


def check_validity_sampled(interp: Interpretation, n: int, samples: int, rng) -> ValidityReport:
    count = 0
    for _ in range(samples):
        b = _random_total(interp.source_language, n, rng)
        count += 1
        for s in interp.target_language.functions:
            delta = interp.fun_defs[s.name]
            terms = interp.herbrand.get(s.name, ())
            for _, args in _enumerate_tuples(n, s.arity):
                env = {f"x{i}": v for i, v in enumerate(args)}
                values = [y for y in range(n) if eval_formula(b, delta, {**env, "y": y})]
                if len(values) != 1:
                    return ValidityReport(interp.name, n, count, (s.name, args, "functionality", len(values)))
                if not any(
                    eval_formula(b, delta, {**env, "y": eval_term(b, t, env)}) for t in terms
                ):
                    return ValidityReport(interp.name, n, count, (s.name, args, "herbrand", values[0]))
    return ValidityReport(interp.name, n, count)


def _random_total(lang: Language, n: int, rng) -> PartialStructure:
    b = PartialStructure(lang, n)
    for s in lang.symbols:
        table = (b.funs if s.kind == FUN else b.rels)[s.name]
        hi = n if s.kind == FUN else 2
        for i in range(len(table)):
            table[i] = rng.randrange(hi)
    return b


# ---------------------------------------------------------------------------
# Transport and pullback

@dataclass
class TransportReport:
    source_verdict: bool
    target_verdict: bool

    @property
    def counterexample(self) -> bool:
        # The recorded claim: a source structure falsifying its principle maps
        # to a target structure falsifying the target principle.  On finite
        # total structures both principles hold, so this is vacuous; the
        # effective transport is the witness pullback.
        return (not self.source_verdict) and self.target_verdict


def falsification_transport(interp: Interpretation, b: PartialStructure,
                            phi_src: BasicSentence, phi_tgt: BasicSentence) -> TransportReport:
    src_ok = verifies_witness(b, phi_src) is not None
    tgt_ok = verifies_witness(apply_interpretation(interp, b), phi_tgt) is not None
    return TransportReport(src_ok, tgt_ok)


class PullbackError(Exception):
    pass


def pullback_solution(interp: Interpretation, b: PartialStructure,
                      witness: tuple[int, dict[str, int]],
                      phi_src: BasicSentence | None = None,
                      phi_tgt: BasicSentence | None = None) -> tuple[int, dict[str, int]]:
    """Turn a target witness on interp(b) into a source witness on b.

    Candidate points are the closure of the witness elements (plus constant
    values) under source terms to depth 2, tried in canonical order,
    disjunct by disjunct.  Desk-scale stand-in for the reduction's witness
    function; raises PullbackError on exhaustion.
    """
    from finprin import catalog

    if phi_src is None:
        phi_src = catalog.builtin(interp.source_name).sentence
    if phi_tgt is None:
        phi_tgt = catalog.builtin(interp.target_name).sentence
    target = apply_interpretation(interp, b)
    disj, env = witness
    for lit in phi_tgt.matrix[disj]:
        if literal_value(target, lit, env) != V1:
            raise ContractError("supplied witness does not verify the claimed disjunct")

    seeds = sorted(set(env.values()))
    closure = set(seeds)
    for s in interp.source_language.functions:
        if s.arity == 0:
            closure.add(b.fun_value(s.name, ()))
    for _ in range(2):
        new = set()
        for s in interp.source_language.functions:
            for args in itertools.product(sorted(closure), repeat=s.arity):
                new.add(b.fun_value(s.name, args))
        closure |= new
    points = sorted(closure)

    for i, lits in enumerate(phi_src.matrix):
        dvars = sorted({v for lit in lits for v in _lit_vars(lit)})
        for combo in itertools.product(points, repeat=len(dvars)):
            env2 = dict(zip(dvars, combo))
            if all(literal_value(b, lit, env2) == V1 for lit in lits):
                full = {v: env2.get(v, points[0]) for v in phi_src.exist_vars}
                return i, full
    raise PullbackError(
        f"no source witness within the depth-2 closure ({len(points)} points)"
    )


def _lit_vars(lit):
    from finprin.syntax import RelLit, FunLit

    if isinstance(lit, RelLit):
        return lit.args
    if isinstance(lit, FunLit):
        return lit.args + (lit.value,)
    return (lit.left, lit.right)


# ---------------------------------------------------------------------------
# Serialization (small formula DSL mirroring the sentence syntax)

def term_to_text(t: QTerm) -> str:
    if isinstance(t, TVar):
        return t.name
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(term_to_text(a) for a in t.args)})"


def formula_to_text(f: QF) -> str:
    if isinstance(f, ARel):
        return f"{f.name}({', '.join(term_to_text(a) for a in f.args)})"
    if isinstance(f, AEq):
        return f"{term_to_text(f.left)} = {term_to_text(f.right)}"
    if isinstance(f, QNot):
        return f"!({formula_to_text(f.sub)})"
    if isinstance(f, QAnd):
        return f"({formula_to_text(f.left)} & {formula_to_text(f.right)})"
    if isinstance(f, QOr):
        return f"({formula_to_text(f.left)} | {formula_to_text(f.right)})"
    raise TypeError(f)


def interpretation_to_text(interp: Interpretation) -> str:
    lines = [f"interpretation {interp.name} ({interp.source_name} -> {interp.target_name})"]
    for name, f in interp.rel_defs.items():
        lines.append(f"  rel {name}: {formula_to_text(f)}")
    for name, f in interp.fun_defs.items():
        lines.append(f"  fun {name}: {formula_to_text(f)}")
        terms = ", ".join(term_to_text(t) for t in interp.herbrand.get(name, ()))
        lines.append(f"    herbrand: {terms}")
    return "\n".join(lines) + "\n"
