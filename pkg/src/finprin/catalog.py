"""Built-in principles, their infinite witness models, and largeness checks.

Every entry records the principle in basic form (flat literals over the
existential variables), classification flags, the determinacy facts usable
at desk scale, and, for the strong principles, a computably presented
infinite model of the negation together with its canonical large slices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from finprin.partial import (
    ContractError,
    PartialStructure,
    find_embedding,
    induced_substructure,
    structure_size,
    s_L,
)
from finprin.syntax import (
    FUN,
    REL,
    BasicSentence,
    EqLit,
    FunLit,
    Language,
    RelLit,
    Symbol,
    parse_principle,
)


@dataclass
class ComputableModel:
    """An infinite structure given by total evaluator callbacks on point codes.

    Points are naturals.  Models over N extended by an infinity point encode
    it with the reserved tag 0 and shift naturals up by one (see IND).  For
    languages with the builtin order, point lists handed to
    ``induced_substructure`` should be sorted so the relabeling to [k]
    preserves the order.
    """

    language: Language
    fun_eval: dict[str, Callable]
    rel_eval: dict[str, Callable]
    canonical_slice: Callable[[int], list[int]]
    overflow_bound: Callable[[int], int]
    description: str = ""
    slice_for: Optional[Callable[[Sequence[int]], list[int]]] = None
    collapse_order: Optional[Callable[[Sequence[int]], list[int]]] = None

    def evaluate(self, name: str, args: Sequence[int]) -> int:
        if name in self.fun_eval:
            return self.fun_eval[name](*args)
        return self.rel_eval[name](*args)

    def slice_containing(self, points: Sequence[int]) -> list[int]:
        """A canonical large-slice universe suitable for the given fragment."""
        if self.slice_for is not None:
            return self.slice_for(points)
        return self.canonical_slice(len(points))


@dataclass
class PrincipleEntry:
    name: str
    sentence: BasicSentence
    model: Optional[ComputableModel]
    weak: bool
    strong: bool
    valid_on: Callable[[int], bool]
    valid_note: str
    determinacy_formula: Optional[Callable[[int], int]]
    determinacy_note: str
    lower_bound: Optional[Callable[[int], int]] = None
    lower_bound_witness: Optional[Callable[[int], PartialStructure]] = None
    notes: str = ""


def overflow_set(model: ComputableModel, b0_points: Sequence[int]) -> set[int]:
    """Function values on tuples over the fragment that land outside it.

    This is the unique minimal witness set V for the largeness of the
    induced substructure on the fragment.
    """
    pts = list(b0_points)
    inside = set(pts)
    out: set[int] = set()
    for s in model.language.functions:
        for args in _tuples(pts, s.arity):
            v = model.fun_eval[s.name](*args)
            if v not in inside:
                out.add(v)
    return out


def _tuples(points: Sequence[int], arity: int):
    if arity == 0:
        yield ()
        return
    for head in points:
        for rest in _tuples(points, arity - 1):
            yield (head,) + rest


@dataclass
class LargenessReport:
    name: str
    n: int
    overflow: set[int]
    bound: int
    ok: bool
    embedding_checks: int
    embedding_failures: int


def check_largeness(model: ComputableModel, n: int, samples: int = 0,
                    rng: random.Random | None = None, point_window: int | None = None) -> LargenessReport:
    """Check |V| <= g(n) on the canonical slice; optionally sample embeddings.

    Sampling draws random n-point fragments of the model and verifies each
    embeds into the model's canonical large slice for that fragment (whose
    own overflow must also respect the bound).  Keep n small when sampling:
    the embedding search is exponential.
    """
    if n < 1:
        raise ContractError("n must be positive")
    slice_pts = model.canonical_slice(n)
    v = overflow_set(model, slice_pts)
    bound = model.overflow_bound(n)
    ok = len(v) <= bound
    checks = failures = 0
    if samples:
        rng = rng or random.Random(0)
        window = point_window if point_window is not None else 4 * n + 4
        for _ in range(samples):
            pts = sorted(rng.sample(range(window), n))
            frag = induced_substructure(model, pts)
            target_pts = model.slice_containing(pts)
            target = induced_substructure(model, sorted(target_pts))
            tv = overflow_set(model, target_pts)
            checks += 1
            if len(tv) > bound or find_embedding(frag, target) is None:
                failures += 1
    return LargenessReport(model.description, n, v, bound, ok and failures == 0, checks, failures)


# ---------------------------------------------------------------------------
# The principles, in basic form.

_PHP_TEXT = """
principle PHP {
  language { f/1 fun, c/0 fun }
  exists x y u .
    (f(x) = u & f(y) = u & x != y)
    | (f(x) = u & c = u)
}
"""

_OPHP_TEXT = """
principle OPHP {
  language { f/1 fun, g/1 fun, c/0 fun }
  exists x u v w .
    (c = u & g(u) = w & w != u)
    | (f(x) = v & c = v)
    | (f(x) = v & g(v) = w & w != x)
    | (c = u & u != x & g(x) = w & f(w) = v & v != x)
}
"""

_LPHP_TEXT = """
principle LPHP {
  language { f/1 fun, g/1 fun, c/0 fun }
  exists x u v w .
    (c = u & g(u) = w & w != u)
    | (f(x) = v & c = v)
    | (f(x) = v & g(v) = w & w != x)
}
"""

_WPHP_TEXT = """
principle WPHP {
  language { f/2 fun }
  exists x y xp yp z .
    (f(x, y) = z & f(xp, yp) = z & x != xp)
    | (f(x, y) = z & f(xp, yp) = z & y != yp)
}
"""

_WPHP2_TEXT = """
principle WPHP2 {
  language { f/1 fun, g/1 fun }
  exists x y z .
    (f(x) = z & f(y) = z & x != y)
    | (g(x) = z & g(y) = z & x != y)
    | (f(x) = z & g(y) = z)
}
"""

_RPHP_TEXT = """
principle RPHP {
  language { g/2 fun, f0/1 fun, f1/1 fun }
  exists x y w u .
    (g(x, y) = w & f0(w) = u & u != x)
    | (g(x, y) = w & f1(w) = u & u != y)
}
"""

_PAR_TEXT = """
principle PAR {
  language { f/1 fun }
  exists x y z .
    (f(x) = y & f(y) = z & z != x)
    | f(x) = x
}
"""

_HOP_TEXT = """
principle HOP {
  language { f/1 fun, prec/2 rel }
  exists x y z w .
    prec(x, x)
    | (prec(x, y) & prec(y, z) & !prec(x, z))
    | (f(x) = w & !prec(w, x))
}
"""

_IND_TEXT = """
principle IND {
  language { P/1 rel, s/1 fun, prec/2 rel, min/0 fun, max/0 fun }
  exists x y z u v w .
    prec(x, x)
    | (prec(x, y) & prec(y, z) & !prec(x, z))
    | (!prec(x, y) & !prec(y, x) & x != y)
    | (min = u & prec(x, u))
    | (max = v & prec(v, x))
    | (s(x) = w & prec(x, y) & prec(y, w))
    | (max = v & v != x & s(x) = w & !prec(x, w))
    | (min = u & !P(u))
    | (max = v & P(v))
    | (s(x) = w & P(x) & !P(w))
}
"""

# Boolean algebra axioms: commutativity, distributivity, identities,
# complements.  Each disjunct negates one axiom; the last three state that f
# fails to pick a proper nonzero part (the "f(x) = 0" escape is ruled out
# explicitly, otherwise the all-zero f would falsify the principle on every
# finite Boolean algebra).
_HAP_TEXT = """
principle HAP {
  language { join/2 fun, meet/2 fun, compl/1 fun, f/1 fun, zero/0 fun, one/0 fun }
  exists x y z a b c d e .
    (join(x, y) = a & join(y, x) = b & a != b)
    | (meet(x, y) = a & meet(y, x) = b & a != b)
    | (meet(y, z) = a & join(x, a) = b & join(x, y) = c & join(x, z) = d & meet(c, d) = e & b != e)
    | (join(y, z) = a & meet(x, a) = b & meet(x, y) = c & meet(x, z) = d & join(c, d) = e & b != e)
    | (zero = a & join(x, a) = b & b != x)
    | (one = a & meet(x, a) = b & b != x)
    | (compl(x) = a & join(x, a) = b & one = c & b != c)
    | (compl(x) = a & meet(x, a) = b & zero = c & b != c)
    | (zero = a & f(a) = b & b != a)
    | (f(x) = a & meet(a, x) = b & b != a)
    | (f(x) = x & zero = a & x != a)
    | (zero = a & f(x) = a & x != a)
}
"""

_HDP_TEXT = """
principle HDP {
  language { prec/2 rel, b/2 fun, zero/0 fun, one/0 fun }
  exists x y z u v .
    prec(x, x)
    | (prec(x, y) & prec(y, z) & !prec(x, z))
    | (prec(x, y) & b(x, y) = u & !prec(u, y))
    | (prec(x, y) & b(x, y) = u & !prec(x, u))
    | (zero = u & one = v & !prec(u, v))
}
"""

_ITER_TEXT = """
principle ITER {
  language { f/1 fun, builtin < }
  exists u y v .
    (0 = u & f(u) = u)
    | (f(y) = v & v < y)
    | (f(y) = v & y < v & f(v) = v)
}
"""


# ---------------------------------------------------------------------------
# Witness models

def _succ_model(lang: Language, with_pred: bool, with_c: bool, desc: str) -> ComputableModel:
    funs: dict[str, Callable] = {"f": lambda k: k + 1}
    if with_pred:
        funs["g"] = lambda k: max(k - 1, 0)
    if with_c:
        funs["c"] = lambda: 0
    return ComputableModel(
        language=lang,
        fun_eval=funs,
        rel_eval={},
        canonical_slice=lambda n: list(range(n)),
        overflow_bound=lambda n: 1,
        description=desc,
    )


def _par_model(lang: Language) -> ComputableModel:
    return ComputableModel(
        language=lang,
        fun_eval={"f": lambda k: k + 1 if k % 2 == 0 else k - 1},
        rel_eval={},
        canonical_slice=lambda n: list(range(n)),
        overflow_bound=lambda n: 1,
        description="pair-swap involution on the naturals",
    )


def _hop_model(lang: Language) -> ComputableModel:
    return ComputableModel(
        language=lang,
        fun_eval={"f": lambda k: k + 1},
        rel_eval={"prec": lambda i, j: 1 if j < i else 0},
        canonical_slice=lambda n: list(range(n)),
        overflow_bound=lambda n: 1,
        description="inverse order with successor as regressive map",
    )


# IND's model lives on N plus a top point.  Point code 0 is the top point,
# the natural k is coded as k + 1.
IND_TOP = 0


def ind_enc(k: int) -> int:
    return k + 1


def ind_dec(p: int) -> Optional[int]:
    return None if p == IND_TOP else p - 1


def _ind_model(lang: Language) -> ComputableModel:
    def prec(p, q):
        if q == IND_TOP:
            return 0 if p == IND_TOP else 1
        if p == IND_TOP:
            return 0
        return 1 if p < q else 0

    def s(p):
        return IND_TOP if p == IND_TOP else p + 1

    def slice_for(points):
        n = len(points)
        if IND_TOP in points:
            return [ind_enc(k) for k in range(n - 1)] + [IND_TOP]
        return [ind_enc(k) for k in range(n)]

    def collapse_order(points):
        nats = sorted(p for p in points if p != IND_TOP)
        return nats + ([IND_TOP] if IND_TOP in points else [])

    return ComputableModel(
        language=lang,
        fun_eval={"s": s, "min": lambda: ind_enc(0), "max": lambda: IND_TOP},
        rel_eval={"P": lambda p: 0 if p == IND_TOP else 1, "prec": prec},
        canonical_slice=lambda n: [ind_enc(k) for k in range(n)],
        overflow_bound=lambda n: 2,
        description="naturals with a top point, successor fixed on top",
        slice_for=slice_for,
        collapse_order=collapse_order,
    )


def _iter_model(lang: Language) -> ComputableModel:
    return ComputableModel(
        language=lang,
        fun_eval={"f": lambda k: k + 1},
        rel_eval={},
        canonical_slice=lambda n: list(range(n)),
        overflow_bound=lambda n: 1,
        description="successor on the naturals (builtin order kept natural)",
    )


# ---------------------------------------------------------------------------
# Determinacy lower-bound witnesses for HDP and HAP

def hdp_witness(n: int) -> PartialStructure:
    """Natural order with the between-function undefined on adjacent pairs."""
    if n < 2:
        raise ContractError("HDP witness needs n >= 2")
    entry = builtin("HDP")
    a = PartialStructure(entry.sentence.language, n)
    for i in range(n):
        for j in range(n):
            a.rels["prec"][i * n + j] = 1 if i < j else 0
    a.funs["zero"][0] = 0
    a.funs["one"][0] = 1
    for i in range(n):
        for j in range(n):
            if abs(i - j) > 1:
                a.funs["b"][i * n + j] = (i + j) // 2
            elif i == j:
                a.funs["b"][i * n + j] = 0
    return a


def hap_witness(n: int) -> PartialStructure:
    """Boolean algebra of bitmasks with f picking an atom, undefined on atoms."""
    k = n.bit_length() - 1
    if n != 1 << k or k < 1:
        raise ContractError("HAP witness needs n a power of two, n >= 2")
    entry = builtin("HAP")
    a = PartialStructure(entry.sentence.language, n)
    full = n - 1
    for i in range(n):
        for j in range(n):
            a.funs["join"][i * n + j] = i | j
            a.funs["meet"][i * n + j] = i & j
    for i in range(n):
        a.funs["compl"][i] = i ^ full
    a.funs["zero"][0] = 0
    a.funs["one"][0] = full
    for i in range(n):
        if i == 0:
            a.funs["f"][i] = 0
        elif i & (i - 1):  # not an atom: pick the lowest atom below
            a.funs["f"][i] = i & (-i)
    return a


# ---------------------------------------------------------------------------
# Registry

def _ilog2(n: int) -> int:
    return n.bit_length() - 1


def _entries() -> dict[str, PrincipleEntry]:
    php = parse_principle(_PHP_TEXT)
    ophp = parse_principle(_OPHP_TEXT)
    lphp = parse_principle(_LPHP_TEXT)
    wphp = parse_principle(_WPHP_TEXT)
    wphp2 = parse_principle(_WPHP2_TEXT)
    rphp = parse_principle(_RPHP_TEXT)
    par = parse_principle(_PAR_TEXT)
    hop = parse_principle(_HOP_TEXT)
    ind = parse_principle(_IND_TEXT)
    hap = parse_principle(_HAP_TEXT)
    hdp = parse_principle(_HDP_TEXT)
    iter_ = parse_principle(_ITER_TEXT)

    always = lambda n: True
    entries = {
        "PHP": PrincipleEntry(
            "PHP", php, _succ_model(php.language, False, True, "successor with constant 0"),
            weak=False, strong=True, valid_on=always,
            valid_note="n points cannot map injectively into n-1 targets",
            determinacy_formula=lambda n: n + 1,
            determinacy_note="maximal: d(n) = s_L(n) = n+1",
        ),
        "OPHP": PrincipleEntry(
            "OPHP", ophp, _succ_model(ophp.language, True, True, "successor and predecessor with constant 0"),
            weak=False, strong=True, valid_on=always,
            valid_note="no bijection between n points and n-1 targets",
            determinacy_formula=lambda n: 2 * n + 1,
            determinacy_note="maximal: d(n) = s_L(n) = 2n+1",
        ),
        "LPHP": PrincipleEntry(
            "LPHP", lphp, _succ_model(lphp.language, True, True, "successor and predecessor with constant 0"),
            weak=False, strong=True, valid_on=always,
            valid_note="no left-invertible map from n points into n-1 targets",
            determinacy_formula=lambda n: 2 * n + 1,
            determinacy_note="maximal: d(n) = s_L(n) = 2n+1",
        ),
        "WPHP": PrincipleEntry(
            "WPHP", wphp, None,
            weak=True, strong=False, valid_on=always,
            valid_note="n^2 pigeons into n holes always collide",
            determinacy_formula=lambda n: n + 1,
            determinacy_note="d(n) = sqrt(s_L(n)) + 1 = n+1; weak, not strong",
        ),
        "WPHP2": PrincipleEntry(
            "WPHP2", wphp2, None,
            weak=False, strong=False, valid_on=always,
            valid_note="2n pigeons into n holes always collide",
            determinacy_formula=lambda n: n + 1,
            determinacy_note="d(n) = s_L(n)/2 + 1 = n+1; neither weak nor strong",
        ),
        "RPHP": PrincipleEntry(
            "RPHP", rphp, None,
            weak=False, strong=False, valid_on=always,
            valid_note="no retraction of [n] onto [n]^2",
            determinacy_formula=None,
            determinacy_note="d(n) > n^2: leave f0, f1 undefined over any total g",
            lower_bound=lambda n: n * n,
        ),
        "PAR": PrincipleEntry(
            "PAR", par, _par_model(par.language),
            weak=False, strong=True,
            valid_on=lambda n: n % 2 == 1,
            valid_note="involutions on an odd universe have fixed points; invalid for even n",
            determinacy_formula=lambda n: n if n % 2 == 1 else n + 1,
            determinacy_note=(
                "d(n) = n for odd n; for even n the principle is invalid on [n], "
                "so by definition d(n) = s_L(n)+1 = n+1 (recorded claims differ, "
                "stating 0 for even n)"
            ),
        ),
        "HOP": PrincipleEntry(
            "HOP", hop, _hop_model(hop.language),
            weak=False, strong=True, valid_on=always,
            valid_note="finite strict partial orders have minimal elements",
            determinacy_formula=lambda n: n * n + n,
            determinacy_note="maximal: d(n) = s_L(n) = n^2+n",
            notes=(
                "the classical statement lists constants 0 and 1 in the signature "
                "but uses neither; this catalog keeps the two-symbol language"
            ),
        ),
        "IND": PrincipleEntry(
            "IND", ind, _ind_model(ind.language),
            weak=False, strong=True, valid_on=always,
            valid_note="finite induction along a discrete linear order",
            determinacy_formula=lambda n: n * n + 2 * n + 2 if n > 1 else None,
            determinacy_note="maximal for n > 1: d(n) = s_L(n) = n^2+2n+2",
        ),
        "HAP": PrincipleEntry(
            "HAP", hap, None,
            weak=False, strong=False,
            valid_on=lambda n: True,
            valid_note="no finite Boolean algebra is atomless",
            determinacy_formula=None,
            determinacy_note="for n = 2^k: d(n) > s_L(n) - log2(n), via the k-atom algebra",
            lower_bound=lambda n: s_L(hap.language, n) - _ilog2(n),
            lower_bound_witness=hap_witness,
            notes=(
                "the matrix includes the f(x)=0 escape clause; without it the "
                "constant-zero choice of f would falsify the principle on every "
                "finite Boolean algebra"
            ),
        ),
        "HDP": PrincipleEntry(
            "HDP", hdp, None,
            weak=False, strong=False, valid_on=always,
            valid_note="no finite partial order with 0 < 1 is dense",
            determinacy_formula=None,
            determinacy_note="d(n) > 2n^2 - 2n for n > 1, via the adjacent-gap witness",
            lower_bound=lambda n: 2 * n * n - 2 * n,
            lower_bound_witness=hdp_witness,
        ),
        "ITER": PrincipleEntry(
            "ITER", iter_, _iter_model(iter_.language),
            weak=False, strong=False, valid_on=always,
            valid_note="iterating f from 0 reaches a point with f(y) <= y or a fixed point above",
            determinacy_formula=lambda n: n,
            determinacy_note=(
                "maximal: d(n) = s_L(n) = n; classified with builtins, so the "
                "infinite-model strength notion does not apply"
            ),
        ),
    }
    return entries


_REGISTRY: dict[str, PrincipleEntry] | None = None


def names() -> list[str]:
    return list(_registry().keys())


def _registry() -> dict[str, PrincipleEntry]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _entries()
    return _REGISTRY


def builtin(name: str) -> PrincipleEntry:
    """Look up a catalog principle; accepts WPHP' as an alias for WPHP2."""
    key = name.strip().upper().replace("'", "2").replace("′", "2")
    reg = _registry()
    if key not in reg:
        raise KeyError(f"unknown principle {name!r}; known: {', '.join(reg)}")
    return reg[key]
