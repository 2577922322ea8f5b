"""Partial finite structures, 3-valued evaluation, sizes, substructures, embeddings.

Truth values are the ints 0, 1, 2 standing for false, undefined (the 1/2
value), and true; the usual order 0 < 1/2 < 1 becomes 0 < 1 < 2, so min/max
implement conjunction/disjunction and ``2 - v`` implements negation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from finprin.syntax import (
    FUN,
    REL,
    BasicSentence,
    EqLit,
    FoAnd,
    FoApp,
    FoEq,
    FoExists,
    FoForall,
    FoNot,
    FoNum,
    FoOr,
    FoRel,
    FoVar,
    FirstOrderSentence,
    FunLit,
    Language,
    Literal,
    RelLit,
    Symbol,
    _is_numeral,
    to_first_order,
)

V0 = 0      # false
VHALF = 1   # undefined
V1 = 2      # true

_PRETTY = {V0: "0", VHALF: "1/2", V1: "1"}


def truth_name(v: int) -> str:
    return _PRETTY[v]


class ContractError(Exception):
    pass


def tuple_index(args: Sequence[int], n: int) -> int:
    idx = 0
    for a in args:
        idx = idx * n + a
    return idx


def index_tuple(idx: int, arity: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(idx % n)
        idx //= n
    return tuple(reversed(out))


@dataclass
class PartialStructure:
    """Universe [n] with dense tables; None is the undefined value.

    Treat instances as immutable; use ``with_cell`` to derive extensions.
    The builtin order is never stored, it is evaluated as the natural order.
    """

    language: Language
    n: int
    funs: dict[str, list[Optional[int]]] = field(default_factory=dict)
    rels: dict[str, list[Optional[int]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("universe must be nonempty")
        for s in self.language.symbols:
            size = self.n ** s.arity
            table = (self.funs if s.kind == FUN else self.rels).setdefault(s.name, [None] * size)
            if len(table) != size:
                raise ContractError(f"table size mismatch for {s.name}")
            for v in table:
                if v is None:
                    continue
                hi = self.n if s.kind == FUN else 2
                if not 0 <= v < hi:
                    raise ContractError(f"out-of-range entry for {s.name}: {v}")

    def fun_value(self, name: str, args: Sequence[int]) -> Optional[int]:
        return self.funs[name][tuple_index(args, self.n)]

    def rel_value(self, name: str, args: Sequence[int]) -> Optional[int]:
        return self.rels[name][tuple_index(args, self.n)]

    def cell_value(self, kind: str, name: str, args: Sequence[int]) -> Optional[int]:
        table = self.funs if kind == FUN else self.rels
        return table[name][tuple_index(args, self.n)]

    def with_cell(self, kind: str, name: str, args: Sequence[int], value: Optional[int]) -> "PartialStructure":
        funs = {k: list(v) for k, v in self.funs.items()}
        rels = {k: list(v) for k, v in self.rels.items()}
        table = funs if kind == FUN else rels
        table[name][tuple_index(args, self.n)] = value
        return PartialStructure(self.language, self.n, funs, rels)

    def is_total(self) -> bool:
        return all(v is not None for t in self.funs.values() for v in t) and all(
            v is not None for t in self.rels.values() for v in t
        )

    def defined_cells(self) -> Iterable[tuple[str, str, tuple[int, ...], int]]:
        """Yield (kind, symbol, args, value) for every defined cell."""
        for s in self.language.symbols:
            table = self.funs[s.name] if s.kind == FUN else self.rels[s.name]
            for idx, v in enumerate(table):
                if v is not None:
                    yield s.kind, s.name, index_tuple(idx, s.arity, self.n), v

    def extends(self, other: "PartialStructure") -> bool:
        if self.n != other.n or self.language != other.language:
            return False
        for kind, name, args, v in other.defined_cells():
            if self.cell_value(kind, name, args) != v:
                return False
        return True


def empty_structure(lang: Language, n: int) -> PartialStructure:
    return PartialStructure(lang, n)


def structure_size(a: PartialStructure) -> int:
    """Number of defined cells (builtins excluded by construction)."""
    return sum(v is not None for t in a.funs.values() for v in t) + sum(
        v is not None for t in a.rels.values() for v in t
    )


def s_L(lang: Language, n: int) -> int:
    """Size of a total structure: sum of n^ar(S) over the signature."""
    return sum(n ** s.arity for s in lang.symbols)


def active_points(a: PartialStructure) -> set[int]:
    """Points appearing in a defined cell's arguments or as a function value."""
    out: set[int] = set()
    for kind, name, args, v in a.defined_cells():
        out.update(args)
        if kind == FUN:
            out.add(v)
    return out


# ---------------------------------------------------------------------------
# 3-valued evaluation

def _term_value(a: PartialStructure, t, env: dict[str, int]) -> Optional[int]:
    """Term value in [n], or None for the undefined value; aborts on None."""
    if isinstance(t, FoVar):
        if t.name not in env:
            raise ContractError(f"free variable {t.name}")
        return env[t.name]
    if isinstance(t, FoNum):
        # Builtin numerals carry the induced partial interpretation on [n].
        return t.value if t.value < a.n else None
    if isinstance(t, FoApp):
        vals = []
        for sub in t.args:
            v = _term_value(a, sub, env)
            if v is None:
                return None
            vals.append(v)
        return a.fun_value(t.name, vals)
    raise TypeError(t)


def eval3(a: PartialStructure, phi, env: dict[str, int] | None = None) -> int:
    """Truth value of a sentence in a partial structure (V0, VHALF, V1).

    Follows the Kleene-style clauses: term evaluation aborts to undefined,
    negation flips, conjunction/universal take min over [n], disjunction and
    the existential quantifier take max.
    """
    if isinstance(phi, BasicSentence):
        phi = to_first_order(phi)
    env = env or {}
    return _eval3(a, phi, env)


def _eval3(a: PartialStructure, phi: FirstOrderSentence, env: dict[str, int]) -> int:
    if isinstance(phi, FoEq):
        lv = _term_value(a, phi.left, env)
        rv = _term_value(a, phi.right, env)
        if lv is None or rv is None:
            return VHALF
        return V1 if lv == rv else V0
    if isinstance(phi, FoRel):
        vals = []
        for t in phi.args:
            v = _term_value(a, t, env)
            if v is None:
                return VHALF
            vals.append(v)
        if phi.name == "<":
            return V1 if vals[0] < vals[1] else V0
        rv = a.rel_value(phi.name, vals)
        return VHALF if rv is None else (V1 if rv else V0)
    if isinstance(phi, FoNot):
        return 2 - _eval3(a, phi.sub, env)
    if isinstance(phi, FoAnd):
        l = _eval3(a, phi.left, env)
        if l == V0:
            return V0
        return min(l, _eval3(a, phi.right, env))
    if isinstance(phi, FoOr):
        l = _eval3(a, phi.left, env)
        if l == V1:
            return V1
        return max(l, _eval3(a, phi.right, env))
    if isinstance(phi, FoForall):
        best = V1
        for pt in range(a.n):
            env[phi.var] = pt
            best = min(best, _eval3(a, phi.body, env))
            if best == V0:
                break
        env.pop(phi.var, None)
        return best
    if isinstance(phi, FoExists):
        best = V0
        for pt in range(a.n):
            env[phi.var] = pt
            best = max(best, _eval3(a, phi.body, env))
            if best == V1:
                break
        env.pop(phi.var, None)
        return best
    raise TypeError(phi)


def literal_value(a: PartialStructure, lit: Literal, env: dict[str, int]) -> int:
    """3-valued literal value under a full assignment of its variables."""
    if isinstance(lit, RelLit):
        args = [env[v] for v in lit.args]
        if lit.name == "<":
            return V1 if args[0] < args[1] else V0
        rv = a.rel_value(lit.name, args)
        if rv is None:
            return VHALF
        v = V1 if rv else V0
        return v if lit.positive else 2 - v
    if isinstance(lit, FunLit):
        if _is_numeral(lit.name):
            k = int(lit.name)
            if k >= a.n:
                return VHALF
            return V1 if env[lit.value] == k else V0
        fv = a.fun_value(lit.name, [env[v] for v in lit.args])
        if fv is None:
            return VHALF
        return V1 if fv == env[lit.value] else V0
    v = V1 if env[lit.left] == env[lit.right] else V0
    return v if lit.positive else 2 - v


# ---------------------------------------------------------------------------
# Fast verification witness search
#
# Verification of a basic sentence needs all literals of some disjunct to take
# value 1 under some assignment.  The search is cell-driven: positive symbol
# literals with unbound variables enumerate matching defined cells, function
# literals with bound arguments propagate their value, and everything fully
# bound is a constant-time check.  Equivalent to eval3 == V1 (cross-checked
# in the test suite) but usable at n in the hundreds on sparse structures.

def verifies_witness(a: PartialStructure, s: BasicSentence) -> Optional[tuple[int, dict[str, int]]]:
    """A (disjunct index, assignment) verifying s in a, or None."""
    by_cell: dict[str, list[tuple[tuple[int, ...], int]]] = {}

    def defined_of(name: str, kind: str) -> list[tuple[tuple[int, ...], int]]:
        key = kind + ":" + name
        if key not in by_cell:
            sym = a.language.symbol(name)
            table = a.funs[name] if kind == FUN else a.rels[name]
            by_cell[key] = [
                (index_tuple(i, sym.arity, a.n), v) for i, v in enumerate(table) if v is not None
            ]
        return by_cell[key]

    for i, disj in enumerate(s.matrix):
        env = _disjunct_search(a, list(disj), {}, defined_of)
        if env is not None:
            full = {v: env.get(v, 0) for v in s.exist_vars}
            return i, full
    return None


def _choose_literal(a, lits, env):
    """Pick the cheapest literal to process next; None if lits is empty."""
    best = None
    best_cost = None
    for idx, lit in enumerate(lits):
        unbound = [v for v in set(_lit_vars(lit)) if v not in env]
        if not unbound:
            cost = 0
        elif isinstance(lit, FunLit) and not _is_numeral(lit.name) and all(
            v in env for v in lit.args
        ):
            cost = 1
        elif isinstance(lit, FunLit) and _is_numeral(lit.name):
            cost = 1
        elif isinstance(lit, (RelLit, FunLit)) and (
            not isinstance(lit, RelLit) or lit.name != "<"
        ):
            cost = 10 + len(unbound)
        else:
            cost = 1000 + len(unbound)  # order/equality literal needing enumeration
        if best_cost is None or cost < best_cost:
            best, best_cost = idx, cost
    return best


def _lit_vars(lit: Literal) -> tuple[str, ...]:
    if isinstance(lit, RelLit):
        return lit.args
    if isinstance(lit, FunLit):
        return lit.args + (lit.value,)
    return (lit.left, lit.right)


def _disjunct_search(a, lits, env, defined_of):
    if not lits:
        return env
    idx = _choose_literal(a, lits, env)
    lit = lits[idx]
    rest = lits[:idx] + lits[idx + 1 :]
    unbound = [v for v in set(_lit_vars(lit)) if v not in env]

    if not unbound:
        return _disjunct_search(a, rest, env, defined_of) if literal_value(a, lit, env) == V1 else None

    if isinstance(lit, FunLit) and _is_numeral(lit.name):
        k = int(lit.name)
        if k >= a.n:
            return None
        env2 = dict(env)
        env2[lit.value] = k
        return _disjunct_search(a, rest, env2, defined_of)

    if isinstance(lit, FunLit) and all(v in env for v in lit.args):
        fv = a.fun_value(lit.name, [env[v] for v in lit.args])
        if fv is None:
            return None
        env2 = dict(env)
        env2[lit.value] = fv
        return _disjunct_search(a, rest, env2, defined_of)

    if isinstance(lit, FunLit) or (isinstance(lit, RelLit) and lit.name != "<"):
        kind = FUN if isinstance(lit, FunLit) else REL
        want = None
        if isinstance(lit, RelLit):
            want = 1 if lit.positive else 0
        pattern = list(lit.args) + ([lit.value] if isinstance(lit, FunLit) else [])
        for args, val in defined_of(lit.name, kind):
            if want is not None and val != want:
                continue
            point_of = list(args) + ([val] if isinstance(lit, FunLit) else [])
            env2 = dict(env)
            ok = True
            for var, pt in zip(pattern, point_of):
                if var in env2:
                    if env2[var] != pt:
                        ok = False
                        break
                else:
                    env2[var] = pt
            if ok:
                got = _disjunct_search(a, rest, env2, defined_of)
                if got is not None:
                    return got
        return None

    # Order or equality literal with unbound variables: enumerate the
    # canonically-first unbound variable over the universe.
    var = min(unbound)
    for pt in range(a.n):
        env2 = dict(env)
        env2[var] = pt
        got = _disjunct_search(a, [lit] + rest, env2, defined_of)
        if got is not None:
            return got
    return None


def verifies(a: PartialStructure, phi) -> bool:
    """True when the structure gives the sentence truth value 1."""
    if isinstance(phi, BasicSentence):
        return verifies_witness(a, phi) is not None
    return eval3(a, phi) == V1


def falsifies(a: PartialStructure, phi) -> bool:
    if isinstance(phi, BasicSentence):
        phi = to_first_order(phi)
    return eval3(a, FoNot(phi)) == V1


# ---------------------------------------------------------------------------
# Substructures and embeddings

def induced_substructure(source, points: Sequence[int]) -> PartialStructure:
    """The induced partial substructure on the given points, relabeled to [k].

    ``source`` is a PartialStructure or a catalog ComputableModel (anything
    with ``language`` plus per-symbol evaluation).  Relation values are
    copied; function values are kept when they land inside the subset and
    undefined otherwise.
    """
    if len(set(points)) != len(points):
        raise ContractError("subset points must be pairwise distinct")
    k = len(points)
    if k == 0:
        raise ContractError("induced substructure needs a nonempty subset")
    lang = source.language
    rank = {p: i for i, p in enumerate(points)}

    out = PartialStructure(lang, k)
    is_struct = isinstance(source, PartialStructure)
    if is_struct:
        for p in points:
            if not 0 <= p < source.n:
                raise ContractError(f"point {p} outside universe")

    for s in lang.symbols:
        table = (out.funs if s.kind == FUN else out.rels)[s.name]
        for idx in range(k ** s.arity):
            sub_args = index_tuple(idx, s.arity, k)
            args = [points[i] for i in sub_args]
            if is_struct:
                v = source.cell_value(s.kind, s.name, args)
            else:
                v = source.evaluate(s.name, args)
            if v is None:
                continue
            if s.kind == FUN:
                table[idx] = rank.get(v)
            else:
                table[idx] = v
    return out


def find_embedding(b0: PartialStructure, a: PartialStructure) -> Optional[dict[int, int]]:
    """An injective map carrying b0 onto a partial substructure of a.

    Defined cells of b0 must map onto equal defined cells of a; undefined
    cells are unconstrained.  Complete backtracking search; returns None
    when no embedding exists.
    """
    if b0.language != a.language:
        raise ContractError("language mismatch")
    if b0.n > a.n:
        return None

    cells = list(b0.defined_cells())
    # Constraint degree heuristic: most-constrained points first.
    degree = {p: 0 for p in range(b0.n)}
    for kind, name, args, v in cells:
        for p in args:
            degree[p] += 1
        if kind == FUN:
            degree[v] += 1
    order = sorted(range(b0.n), key=lambda p: (-degree[p], p))

    assign: dict[int, int] = {}
    used: set[int] = set()

    def consistent(p: int) -> bool:
        for kind, name, args, v in cells:
            pts = set(args) | ({v} if kind == FUN else set())
            if p not in pts or any(q not in assign for q in pts):
                continue
            img_args = [assign[q] for q in args]
            got = a.cell_value(kind, name, img_args)
            want = assign[v] if kind == FUN else v
            if got != want:
                return False
        return True

    def rec(i: int) -> bool:
        if i == len(order):
            return True
        p = order[i]
        for cand in range(a.n):
            if cand in used:
                continue
            assign[p] = cand
            used.add(cand)
            if consistent(p) and rec(i + 1):
                return True
            used.discard(cand)
            del assign[p]
        return False

    if rec(0):
        return dict(assign)
    return None


def is_embedding(b0: PartialStructure, a: PartialStructure, pi: dict[int, int]) -> bool:
    """Check the embedding conditions for an explicit map."""
    if len(set(pi.values())) != len(pi):
        return False
    for kind, name, args, v in b0.defined_cells():
        if any(p not in pi for p in args):
            return False
        got = a.cell_value(kind, name, [pi[p] for p in args])
        if kind == FUN:
            if v not in pi or got != pi[v]:
                return False
        elif got != v:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON structure format

def structure_to_json(a: PartialStructure) -> str:
    obj = {
        "n": a.n,
        "fun": {s.name: a.funs[s.name] for s in a.language.functions},
        "rel": {s.name: a.rels[s.name] for s in a.language.relations},
    }
    return json.dumps(obj)


def structure_from_json(lang: Language, text: str) -> PartialStructure:
    obj = json.loads(text)
    funs = {k: list(v) for k, v in obj.get("fun", {}).items()}
    rels = {k: list(v) for k, v in obj.get("rel", {}).items()}
    return PartialStructure(lang, obj["n"], funs, rels)


def all_partial_structures(lang: Language, n: int):
    """Every partial structure on [n]; exponential, test-scale only."""
    cells = []
    for s in lang.symbols:
        dom = list(range(n)) if s.kind == FUN else [0, 1]
        for idx in range(n ** s.arity):
            cells.append((s.kind, s.name, idx, dom))
    for combo in itertools.product(*[[None] + d for _, _, _, d in cells]):
        a = PartialStructure(lang, n)
        for (kind, name, idx, _), v in zip(cells, combo):
            (a.funs if kind == FUN else a.rels)[name][idx] = v
        yield a


def all_total_structures(lang: Language, n: int):
    cells = []
    for s in lang.symbols:
        dom = list(range(n)) if s.kind == FUN else [0, 1]
        for idx in range(n ** s.arity):
            cells.append((s.kind, s.name, idx, dom))
    for combo in itertools.product(*[d for _, _, _, d in cells]):
        a = PartialStructure(lang, n)
        for (kind, name, idx, _), v in zip(cells, combo):
            (a.funs if kind == FUN else a.rels)[name][idx] = v
        yield a
