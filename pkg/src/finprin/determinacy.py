"""Exact determinacy by complete search over partial structures.

d(n) is the least m such that every partial structure on [n] of size at
least m verifies the principle.  Non-verifying structures are downward
closed (a partial substructure of a non-verifying structure cannot verify),
so d(n) = 1 + the maximum size of a non-verifying structure, and a DFS that
fills cells in canonical order may prune a branch as soon as the current
prefix verifies.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

from finprin.partial import (
    PartialStructure,
    all_partial_structures,
    eval3,
    index_tuple,
    s_L,
    structure_size,
    V1,
)
from finprin.syntax import FUN, REL, BasicSentence, EqLit, FunLit, RelLit, _is_numeral

DEFAULT_NODE_CAP = 10 ** 8
NODE_CAP_ENV = "FINPRIN_NODE_CAP"


class FeasibilityError(Exception):
    def __init__(self, estimate: float, cap: int):
        super().__init__(f"search space estimate {estimate:.2e} exceeds cap {cap:.0e}")
        self.estimate = estimate
        self.cap = cap


def node_cap(override: int | None = None) -> int:
    if override is not None:
        return override
    env = os.environ.get(NODE_CAP_ENV)
    return int(env) if env else DEFAULT_NODE_CAP


@dataclass
class SearchOutcome:
    size: Optional[int]                # None: every structure verifies (degenerate)
    witness: Optional[PartialStructure]
    nodes: int
    method: str
    degenerate: bool = False


def _cells(s: BasicSentence, n: int):
    """Canonical cell order: signature order, then tuple index."""
    out = []
    for sym in s.language.symbols:
        dom = n if sym.kind == FUN else 2
        for idx in range(n ** sym.arity):
            out.append((sym.kind, sym.name, sym.arity, idx, dom))
    return out


def _compile_candidates(s: BasicSentence, n: int, cell_id):
    """One candidate per (assignment, disjunct): the cell values it needs.

    A candidate whose equality/builtin literals fail, or that needs two
    different values in one cell, is dropped.  Returns (candidates, empty)
    where empty flags a candidate with no cell constraints at all (the
    sentence is then verified by every structure, the degenerate case).
    """
    candidates = []
    has_empty = False
    k = len(s.exist_vars)
    for disj in s.matrix:
        dvars = sorted({v for lit in disj for v in _lit_vars(lit)})
        for combo in _assignments(dvars, n):
            need: dict[int, int] = {}
            dead = False
            for lit in disj:
                if isinstance(lit, EqLit):
                    ok = (combo[lit.left] == combo[lit.right]) == lit.positive
                    if not ok:
                        dead = True
                        break
                    continue
                if isinstance(lit, RelLit) and lit.name == "<":
                    if not combo[lit.args[0]] < combo[lit.args[1]]:
                        dead = True
                        break
                    continue
                if isinstance(lit, FunLit) and _is_numeral(lit.name):
                    kk = int(lit.name)
                    if kk >= n or combo[lit.value] != kk:
                        dead = True
                        break
                    continue
                if isinstance(lit, RelLit):
                    args = tuple(combo[v] for v in lit.args)
                    cid = cell_id[(REL, lit.name, args)]
                    want = 1 if lit.positive else 0
                else:
                    args = tuple(combo[v] for v in lit.args)
                    cid = cell_id[(FUN, lit.name, args)]
                    want = combo[lit.value]
                if need.get(cid, want) != want:
                    dead = True
                    break
                need[cid] = want
            if dead:
                continue
            if not need:
                has_empty = True
                continue
            candidates.append(need)
    return candidates, has_empty


def _lit_vars(lit):
    if isinstance(lit, RelLit):
        return lit.args
    if isinstance(lit, FunLit):
        return lit.args + (lit.value,)
    return (lit.left, lit.right)


def _assignments(vars_, n):
    if not vars_:
        yield {}
        return
    head, rest = vars_[0], vars_[1:]
    for sub in _assignments(rest, n):
        for v in range(n):
            out = dict(sub)
            out[head] = v
            yield out


def max_nonverifying(s: BasicSentence, n: int, cap: int | None = None) -> SearchOutcome:
    """Largest non-verifying partial structure on [n]; complete DFS.

    Prunes a branch as soon as the filled prefix verifies (monotonicity),
    and by the remaining-cell bound once a witness of some size is known.
    Deterministic: cells in canonical order, defined values before the
    undefined one, so the reported witness is the first maximum in DFS
    order.
    """
    cap = node_cap(cap)
    cells = _cells(s, n)
    cell_id = {}
    for i, (kind, name, arity, idx, dom) in enumerate(cells):
        cell_id[(kind, name, index_tuple(idx, arity, n))] = i

    estimate = 1.0
    for _, _, _, _, dom in cells:
        estimate *= dom + 1
    candidates, degenerate = _compile_candidates(s, n, cell_id)
    if degenerate:
        return SearchOutcome(None, None, 0, "branch-and-bound", degenerate=True)
    if estimate > cap * 16:
        # Still try: pruning usually collapses the space, the node counter
        # enforces the cap for real.
        pass

    by_cell: list[list[tuple[int, int]]] = [[] for _ in cells]
    remaining = []
    for ci, need in enumerate(candidates):
        remaining.append(len(need))
        for cell, want in need.items():
            by_cell[cell].append((ci, want))

    ncells = len(cells)
    dead = [False] * len(candidates)
    best_size = -1
    best_assign: list[Optional[int]] | None = None
    assign: list[Optional[int]] = [None] * ncells
    nodes = 0

    def rec(i: int, defined: int) -> None:
        nonlocal nodes, best_size, best_assign
        nodes += 1
        if nodes > cap:
            raise FeasibilityError(estimate, cap)
        if defined + (ncells - i) <= best_size:
            return
        if i == ncells:
            if defined > best_size:
                best_size = defined
                best_assign = list(assign)
            return
        kind, name, arity, idx, dom = cells[i]
        values = list(range(dom)) + [None]
        for v in values:
            assign[i] = v
            verified = False
            undo: list[tuple[int, bool]] = []
            for ci, want in by_cell[i]:
                if dead[ci]:
                    continue
                if v is not None and want == v:
                    remaining[ci] -= 1
                    undo.append((ci, False))
                    if remaining[ci] == 0:
                        verified = True
                else:
                    dead[ci] = True
                    undo.append((ci, True))
            if not verified:
                rec(i + 1, defined + (v is not None))
            for ci, was_kill in undo:
                if was_kill:
                    dead[ci] = False
                else:
                    remaining[ci] += 1
        assign[i] = None

    rec(0, 0)

    if best_assign is None:
        # Unreachable for non-degenerate sentences: the empty structure never
        # verifies anything.
        return SearchOutcome(None, None, nodes, "branch-and-bound", degenerate=True)
    witness = PartialStructure(s.language, n)
    for i, (kind, name, arity, idx, dom) in enumerate(cells):
        if best_assign[i] is not None:
            (witness.funs if kind == FUN else witness.rels)[name][idx] = best_assign[i]
    return SearchOutcome(best_size, witness, nodes, "branch-and-bound")


def max_nonverifying_exhaustive(s: BasicSentence, n: int, cap: int | None = None) -> SearchOutcome:
    """Independent oracle: enumerate every partial structure, check via eval3."""
    cap = node_cap(cap)
    total = 1
    for sym in s.language.symbols:
        total *= ((n if sym.kind == FUN else 2) + 1) ** (n ** sym.arity)
    if total > cap:
        raise FeasibilityError(float(total), cap)
    best = -1
    witness = None
    nodes = 0
    for a in all_partial_structures(s.language, n):
        nodes += 1
        if eval3(a, s) != V1:
            sz = structure_size(a)
            if sz > best:
                best = sz
                witness = a
    if witness is None:
        return SearchOutcome(None, None, nodes, "exhaustive", degenerate=True)
    return SearchOutcome(best, witness, nodes, "exhaustive")


def determinacy(s: BasicSentence, n: int, cap: int | None = None, exhaustive: bool = False) -> int:
    """d(n); 0 in the degenerate case of a sentence every structure verifies.

    The degenerate value 0 contradicts the usual d(n) > 0 reading and is
    flagged by SearchOutcome.degenerate; it occurs only for sentences like
    "exists x . x = x" whose verification needs no oracle cells at all.
    """
    out = (max_nonverifying_exhaustive if exhaustive else max_nonverifying)(s, n, cap)
    if out.size is None:
        return 0
    return out.size + 1


@dataclass
class WeaknessRow:
    n: int
    d: int
    s: int
    ratio: float


@dataclass
class WeaknessReport:
    principle: str
    rows: list[WeaknessRow]
    fitted_exponent: Optional[float]

    def as_tsv(self) -> str:
        lines = ["n\td(n)\ts_L(n)\tratio"]
        for r in self.rows:
            lines.append(f"{r.n}\t{r.d}\t{r.s}\t{r.ratio:.4f}")
        if self.fitted_exponent is not None:
            lines.append(f"# fitted exponent of s_L/d ~ n^e: e = {self.fitted_exponent:.3f}")
        return "\n".join(lines) + "\n"


def weakness_report(s: BasicSentence, n_range, cap: int | None = None) -> WeaknessReport:
    """Descriptive table of d, s_L and their ratio; no asymptotic verdict."""
    rows = []
    for n in n_range:
        d = determinacy(s, n, cap)
        sl = s_L(s.language, n)
        rows.append(WeaknessRow(n, d, sl, sl / d if d else math.inf))
    pts = [(math.log(r.n), math.log(r.ratio)) for r in rows if r.n > 1 and 0 < r.ratio < math.inf]
    expo = None
    if len(pts) >= 2:
        mx = sum(x for x, _ in pts) / len(pts)
        my = sum(y for _, y in pts) / len(pts)
        denom = sum((x - mx) ** 2 for x, _ in pts)
        if denom > 0:
            expo = sum((x - mx) * (y - my) for x, y in pts) / denom
    return WeaknessReport(s.name, rows, expo)
