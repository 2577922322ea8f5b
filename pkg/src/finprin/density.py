"""The extension procedures behind the density arguments, as executable code.

All three procedures grow a partial oracle while keeping its coded structure
embeddable into a fixed infinite model of the principle's negation:

* extend_define: answer one cell, re-targeting the embedding on one fresh
  point when the model's value falls outside the current image;
* complete_trees_small: answer cells until a whole tree family completes
  (small target universes);
* core_extend: the averaging iteration that completes enough tree runs to
  verify a weak principle while touching only about b0 * |phi| cells,
  followed by pruning to the witnessing queries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from finprin.catalog import ComputableModel, overflow_set
from finprin.dtrees import TreeFamily, build_C, run_trace
from finprin.encoding import (
    FunBitKey,
    PartialOracle,
    RelKey,
    is_relevant,
    len_bits,
    oracle_of_partial,
    partial_of_oracle,
)
from finprin.partial import (
    ContractError,
    PartialStructure,
    active_points,
    find_embedding,
    induced_substructure,
    is_embedding,
    structure_size,
    s_L,
    verifies_witness,
)
from finprin.syntax import FUN, REL, BasicSentence, formula_size


class HypothesisError(Exception):
    """A procedure was invoked outside its stated inequality; never silent."""


class DensityInternalError(AssertionError):
    """A bound the argument guarantees failed: an implementation bug."""


@dataclass
class DensityContext:
    """Embedding state: an injective total map [n] -> model points.

    Invariant: the current oracle's coded structure embeds into the model
    via ``embedding``.
    """

    model: ComputableModel
    principle: BasicSentence
    n: int
    embedding: dict[int, int]

    def __post_init__(self):
        if len(set(self.embedding.values())) != len(self.embedding):
            raise ContractError("embedding must be injective")

    @property
    def r_L(self) -> int:
        return self.principle.language.r_L()

    def inverse(self) -> dict[int, int]:
        return {v: k for k, v in self.embedding.items()}

    def image(self) -> list[int]:
        return [self.embedding[a] for a in range(self.n)]


def new_context(model: ComputableModel, principle: BasicSentence, n: int) -> DensityContext:
    pts = model.canonical_slice(n)
    if len(pts) != n:
        raise ContractError("canonical slice has the wrong cardinality")
    return DensityContext(model, principle, n, {a: pts[a] for a in range(n)})


def check_context(ctx: DensityContext, p: PartialOracle) -> None:
    """Re-verify that the context embedding embeds the coded structure."""
    b = partial_of_oracle(p)
    frag_pts = sorted(set(ctx.embedding.values()))
    frag = induced_substructure(ctx.model, frag_pts)
    rank = {pt: i for i, pt in enumerate(frag_pts)}
    pi = {a: rank[ctx.embedding[a]] for a in range(ctx.n)}
    if not is_embedding(b, frag, pi):
        raise DensityInternalError("context embedding no longer embeds the oracle")


# ---------------------------------------------------------------------------
# Single-cell extension

def extend_define(ctx: DensityContext, p: PartialOracle, symbol: str,
                  args: tuple[int, ...]) -> tuple[PartialOracle, DensityContext]:
    """Define one cell consistently with the model; a 1-extension.

    Requires n > size(p) * r_L.  When the model's function value is outside
    the embedding's image, the embedding is re-targeted on one point that is
    neither active nor among the cell's arguments.
    """
    sym = ctx.principle.language.symbol(symbol)
    if sym is None:
        raise ContractError(f"unknown symbol {symbol!r}")
    if any(not 0 <= a < ctx.n for a in args) or len(args) != sym.arity:
        raise ContractError(f"bad cell {symbol}{args}")
    if p.defined_cell(sym.kind, symbol, tuple(args)):
        return p, ctx

    if not ctx.n > p.size() * ctx.r_L:
        raise HypothesisError(
            f"need n > size(p) * r_L: {ctx.n} > {p.size()} * {ctx.r_L} fails"
        )

    e = ctx.embedding
    image_args = [e[a] for a in args]
    if sym.kind == REL:
        bit = ctx.model.rel_eval[symbol](*image_args)
        key = RelKey(symbol, tuple(args))
        q = PartialOracle(
            p.language, p.n,
            p.p0 | ({key} if not bit else set()),
            p.p1 | ({key} if bit else set()),
        )
        return q, ctx

    v = ctx.model.fun_eval[symbol](*image_args)
    inv = ctx.inverse()
    if v in inv:
        b = inv[v]
        ctx2 = ctx
    else:
        active = active_points(partial_of_oracle(p))
        blocked = active | set(args)
        fresh = next((a for a in range(ctx.n) if a not in blocked), None)
        if fresh is None:
            # The stated inequality guarantees a non-active point but not one
            # outside the cell's own arguments; fail loudly in that corner.
            raise HypothesisError(
                "no re-target point outside the active set and the cell arguments"
            )
        e2 = dict(e)
        e2[fresh] = v
        ctx2 = DensityContext(ctx.model, ctx.principle, ctx.n, e2)
        b = fresh
    adds0, adds1 = [], []
    for i in range(len_bits(ctx.n)):
        key = FunBitKey(symbol, tuple(args), i)
        ((adds1 if (b >> i) & 1 else adds0)).append(key)
    q = PartialOracle(p.language, p.n, p.p0 | frozenset(adds0), p.p1 | frozenset(adds1))
    return q, ctx2


def define_key(ctx: DensityContext, p: PartialOracle, key) -> tuple[PartialOracle, DensityContext]:
    """extend_define addressed by a relevant key (bit index ignored)."""
    if isinstance(key, RelKey):
        return extend_define(ctx, p, key.symbol, key.args)
    return extend_define(ctx, p, key.symbol, key.args)


# ---------------------------------------------------------------------------
# Oracle views over the model through an embedding

class ImageOracle:
    """Answers per the full induced structure on the embedding's image.

    A function cell is answered when the model's value lies inside the
    image (the standard partial-oracle pullback of the induced structure);
    relation cells are always answered.
    """

    def __init__(self, ctx_model: ComputableModel, language, n: int, embedding: dict[int, int]):
        self.model = ctx_model
        self.language = language
        self.n = n
        self.embedding = embedding
        self.inverse = {v: k for k, v in embedding.items()}

    def bit(self, key) -> Optional[int]:
        if isinstance(key, RelKey):
            args = [self.embedding[a] for a in key.args]
            return 1 if self.model.rel_eval[key.symbol](*args) else 0
        args = [self.embedding[a] for a in key.args]
        v = self.model.fun_eval[key.symbol](*args)
        b = self.inverse.get(v)
        if b is None:
            return None
        return (b >> key.bit) & 1

    def cell_preimage(self, symbol: str, args: tuple[int, ...]) -> Optional[int]:
        pts = [self.embedding[a] for a in args]
        return self.inverse.get(self.model.fun_eval[symbol](*pts))

    def as_oracle(self) -> PartialOracle:
        """Materialize as a plain partial oracle (test-scale)."""
        p0, p1 = set(), set()
        lb = len_bits(self.n)
        for s in self.language.symbols:
            for args in _tuples(range(self.n), s.arity):
                if s.kind == REL:
                    key = RelKey(s.name, args)
                    (p1 if self.bit(key) else p0).add(key)
                else:
                    b = self.cell_preimage(s.name, args)
                    if b is None:
                        continue
                    for i in range(lb):
                        key = FunBitKey(s.name, args, i)
                        (p1 if (b >> i) & 1 else p0).add(key)
        return PartialOracle(self.language, self.n, frozenset(p0), frozenset(p1))


def _tuples(points, arity: int):
    pts = list(points)
    if arity == 0:
        yield ()
        return
    for head in pts:
        for rest in _tuples(pts, arity - 1):
            yield (head,) + rest


# ---------------------------------------------------------------------------
# Small-universe completion

def complete_trees_small(ctx: DensityContext, p: PartialOracle, family: TreeFamily,
                         b0: int) -> tuple[PartialOracle, DensityContext]:
    """Answer cells until every tree run completes; the small-m route.

    Requires n > r_L * (size(p) + b0 * |L~| * m^(r_L~ - 1)).  The result is
    a b0 * |L~| * m^(r_L~ - 1)-extension whose derived structure is total.
    """
    lang_t = family.language
    m = family.m
    cost = b0 * len(lang_t.symbols) * m ** (lang_t.r_L() - 1)
    if not ctx.n > ctx.r_L * (p.size() + cost):
        raise HypothesisError(
            f"need n > r_L*(size(p) + b0*|L~|*m^(r_L~-1)): "
            f"{ctx.n} > {ctx.r_L}*({p.size()} + {cost}) fails"
        )
    if family.height_bound > b0:
        raise ContractError("family height exceeds b0")

    start = p.size()
    progress = True
    while progress:
        progress = False
        for s in lang_t.symbols:
            tree = family.trees[s.name]
            for args in _tuples(range(m), s.arity):
                seq, out, trace = run_trace(tree, args, p)
                if seq.complete:
                    continue
                key = trace[-1][0]
                p, ctx = extend_define(ctx, p, key.symbol, key.args)
                progress = True
    c = build_C(family, p)
    if not c.is_total():
        raise DensityInternalError("derived structure still partial after completion")
    if p.size() > start + cost:
        raise DensityInternalError("small-m extension exceeded its size bound")
    return p, ctx


# ---------------------------------------------------------------------------
# The core extension

@dataclass
class CoreExtendResult:
    oracle: PartialOracle
    context: DensityContext
    rounds: list[dict]
    witness: tuple

    def trace_json(self) -> str:
        return "\n".join(json.dumps(r) for r in self.rounds) + "\n"


def core_extend(ctx: DensityContext, p: PartialOracle, family: TreeFamily, b0: int,
                phi_t: BasicSentence, d_t: Callable[[int], int]) -> CoreExtendResult:
    """Extend p by about b0 * |phi| cells so the derived structure verifies phi_t.

    Follows the averaging argument: run every tree against the full induced
    structure on the embedding's image; drop completed pairs; pick the
    least-touched non-active points and re-target them onto the overflow
    set; repeat.  Success within b0 rounds is guaranteed by the stated
    inequalities, so running out of rounds raises an internal error.
    """
    lang = ctx.principle.language
    lang_t = family.language
    n, m = ctx.n, family.m
    r_L = ctx.r_L
    g_n = ctx.model.overflow_bound(n)
    dt_m = d_t(m)
    s_t = s_L(lang_t, m)

    if family.height_bound > b0:
        raise ContractError("family height exceeds b0")
    if not n >= (2 * b0 * b0 * r_L + 1) * g_n + r_L * p.size():
        raise HypothesisError(
            f"need n >= (2*b0^2*r_L + 1)*g(n) + r_L*size(p): "
            f"{n} >= {(2 * b0 * b0 * r_L + 1) * g_n + r_L * p.size()} fails"
        )
    if not s_t >= 2 * b0 * dt_m:
        raise HypothesisError(
            f"need s_L~(m) >= 2*b0*d~(m): {s_t} >= {2 * b0 * dt_m} fails"
        )

    w_active = active_points(partial_of_oracle(p))
    reserve = [a for a in range(n) if a not in w_active]

    e = dict(ctx.embedding)
    all_pairs = [
        (s.name, args) for s in lang_t.symbols for args in _tuples(range(m), s.arity)
    ]
    x_pairs = list(all_pairs)
    rounds_log: list[dict] = []

    for rnd in range(b0 + 1):
        e = _ensure_large_image(ctx, p, e, g_n)
        view = ImageOracle(ctx.model, lang, n, e)

        runs = {}
        for name, args in all_pairs:
            runs[(name, args)] = run_trace(family.trees[name], args, view)

        c = _assemble_c(family, runs)
        witness = verifies_witness(c, phi_t)
        if witness is not None:
            ctx2 = DensityContext(ctx.model, ctx.principle, n, e)
            q = prune_to_witness(view, p, family, phi_t, witness=witness)
            if q.size() > p.size() + b0 * formula_size(phi_t):
                raise DensityInternalError("pruned extension exceeded b0 * |phi|")
            rounds_log.append({"round": rnd, "event": "verified", "c_size": structure_size(c)})
            return CoreExtendResult(q, ctx2, rounds_log, witness)

        if structure_size(c) >= dt_m:
            raise DensityInternalError(
                "derived structure reached determinacy size without verifying"
            )
        if rnd == b0:
            break

        y_pairs = [pq for pq in x_pairs if not runs[pq][0].complete]
        if not len(y_pairs) > len(x_pairs) - dt_m:
            raise DensityInternalError("completed-pair drop exceeded the determinacy bound")

        overflow = sorted(overflow_set(ctx.model, list(e.values())))
        touch_count = {r: 0 for r in reserve}
        touched_by: dict[tuple, set] = {}
        inv = {v: k for k, v in e.items()}
        for pq in y_pairs:
            pts: set[int] = set()
            for key, ans in runs[pq][2]:
                if not is_relevant(key, lang, n):
                    continue
                pts.update(key.args)
                if isinstance(key, FunBitKey):
                    b = inv.get(ctx.model.fun_eval[key.symbol](*[e[a] for a in key.args]))
                    if b is not None:
                        pts.add(b)
            touched_by[pq] = pts
            for a in pts:
                if a in touch_count:
                    touch_count[a] += 1

        if len(reserve) < len(overflow):
            raise HypothesisError("reserve of non-active points smaller than the overflow set")
        chosen = sorted(reserve, key=lambda r: (touch_count[r], r))[: len(overflow)]
        chosen_set = set(chosen)
        x_next = [pq for pq in y_pairs if not (touched_by[pq] & chosen_set)]

        denom = n - p.size() * r_L - g_n
        if denom > 0:
            shrink = len(x_pairs) - dt_m - b0 * g_n * s_t * r_L / denom
            if not len(x_next) > shrink:
                raise DensityInternalError("averaging shrink bound violated")

        rounds_log.append(
            {
                "round": rnd,
                "x": len(x_pairs),
                "y": len(y_pairs),
                "x_next": len(x_next),
                "overflow": overflow,
                "chosen": chosen,
                "c_size": structure_size(c),
            }
        )

        for r, v in zip(chosen, overflow):
            e[r] = v
        x_pairs = x_next

    raise DensityInternalError(
        "core extension exhausted its rounds; the stated inequalities exclude this"
    )


def _assemble_c(family: TreeFamily, runs) -> PartialStructure:
    from finprin.partial import tuple_index

    m = family.m
    out = PartialStructure(family.language, m)
    for s in family.language.symbols:
        table = (out.funs if s.kind == FUN else out.rels)[s.name]
        for args in _tuples(range(m), s.arity):
            seq, val, _ = runs[(s.name, args)]
            if seq.complete:
                table[tuple_index(args, m)] = min(val, m - 1) if s.kind == FUN else min(val, 1)
    return out


def _ensure_large_image(ctx: DensityContext, p: PartialOracle, e: dict[int, int],
                        g_n: int) -> dict[int, int]:
    """An embedding of the current induced pullback into a large slice.

    Keeps the incumbent image when its overflow already meets the bound;
    otherwise tries the model's order collapse onto the canonical slice and
    falls back to a complete embedding search.
    """
    image = list(e.values())
    if len(overflow_set(ctx.model, image)) <= g_n:
        return e

    order = getattr(ctx.model, "collapse_order", None) or sorted
    target_pts = ctx.model.slice_containing(image)
    src_sorted = order(image)
    tgt_sorted = order(target_pts)
    collapse = dict(zip(src_sorted, tgt_sorted))
    e2 = {a: collapse[v] for a, v in e.items()}

    cur = _pullback_structure(ctx.model, ctx.principle.language, ctx.n, e)
    frag_pts = sorted(set(tgt_sorted))
    frag = induced_substructure(ctx.model, frag_pts)
    rank = {pt: i for i, pt in enumerate(frag_pts)}
    pi = {a: rank[e2[a]] for a in range(ctx.n)}
    if is_embedding(cur, frag, pi):
        if len(overflow_set(ctx.model, list(e2.values()))) > g_n:
            raise HypothesisError("canonical slice violates the claimed overflow bound")
        return e2

    found = find_embedding(cur, frag)
    if found is None:
        raise HypothesisError(
            "current structure does not embed into the canonical large slice; "
            "the model's largeness claim fails here"
        )
    e3 = {a: frag_pts[found[a]] for a in range(ctx.n)}
    return e3


def _pullback_structure(model: ComputableModel, lang, n: int, e: dict[int, int]) -> PartialStructure:
    """The induced structure on the image, pulled back to [n] through e."""
    from finprin.partial import tuple_index

    inv = {v: k for k, v in e.items()}
    out = PartialStructure(lang, n)
    for s in lang.symbols:
        table = (out.funs if s.kind == FUN else out.rels)[s.name]
        for args in _tuples(range(n), s.arity):
            pts = [e[a] for a in args]
            if s.kind == REL:
                table[tuple_index(args, n)] = 1 if model.rel_eval[s.name](*pts) else 0
            else:
                b = inv.get(model.fun_eval[s.name](*pts))
                if b is not None:
                    table[tuple_index(args, n)] = b
    return out


# ---------------------------------------------------------------------------
# Pruning

def prune_to_witness(q, p: PartialOracle, family: TreeFamily, phi_t: BasicSentence,
                     witness: tuple | None = None) -> PartialOracle:
    """Shrink q to p plus the queries behind one verifying disjunct.

    ``q`` is a partial oracle (or any oracle view) whose derived structure
    verifies phi_t.  Keeps whole bit blocks per function cell.  The result
    extends p, is extended by q, and stays within p.size() + b0 * |phi_t|.
    """
    c = build_C(family, q)
    if witness is None:
        witness = verifies_witness(c, phi_t)
        if witness is None:
            raise ContractError("derived structure does not verify the principle")
    disj, env = witness

    needed: set[tuple[str, tuple[int, ...]]] = set()
    from finprin.syntax import FunLit, RelLit, _is_numeral

    for lit in phi_t.matrix[disj]:
        if isinstance(lit, RelLit) and lit.name != "<":
            needed.add((lit.name, tuple(env[v] for v in lit.args)))
        elif isinstance(lit, FunLit) and not _is_numeral(lit.name):
            needed.add((lit.name, tuple(env[v] for v in lit.args)))

    keys: set = set()
    for name, args in needed:
        seq, out, trace = run_trace(family.trees[name], args, q)
        if not seq.complete:
            raise ContractError("witnessing cell's run is incomplete")
        for key, ans in trace:
            if ans is not None and is_relevant(key, p.language, p.n):
                keys.add(key)

    closed: set = set()
    lb = len_bits(p.n)
    for key in keys:
        if isinstance(key, FunBitKey):
            for i in range(lb):
                closed.add(FunBitKey(key.symbol, key.args, i))
        else:
            closed.add(key)

    if isinstance(q, PartialOracle):
        q0, q1 = q.p0, q.p1
    else:
        q0, q1 = set(), set()
        for key in closed:
            b = q.bit(key)
            if b == 1:
                q1.add(key)
            elif b == 0:
                q0.add(key)
    out0 = frozenset(k for k in q0 if k in p.p0 or k in closed) | p.p0
    out1 = frozenset(k for k in q1 if k in p.p1 or k in closed) | p.p1
    pruned = PartialOracle(p.language, p.n, out0, out1)

    c2 = build_C(family, pruned)
    if verifies_witness(c2, phi_t) is None:
        raise DensityInternalError("pruned oracle lost the verifying witness")
    return pruned
