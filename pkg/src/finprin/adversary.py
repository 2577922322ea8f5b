"""Stateful adversarial oracle: answer queries, keep the structure unverifying.

A session serves point queries against a principle that some infinite model
falsifies.  Every answer extends a partial oracle whose coded structure
embeds into that model, so no sequence of answers within the budget can ever
reveal a verifying witness; claims are refuted by defining the claimed cells
and exhibiting a failed literal.  Tree families can be registered to force a
weak principle's derived structure to verify while the session's own
principle stays unforced.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from finprin import density
from finprin.catalog import ComputableModel, PrincipleEntry
from finprin.density import DensityContext, HypothesisError, ImageOracle
from finprin.dtrees import TreeFamily, build_C
from finprin.encoding import (
    FunBitKey,
    PartialOracle,
    RelKey,
    empty_oracle,
    is_relevant,
    key_from_text,
    key_to_text,
    len_bits,
    partial_of_oracle,
)
from finprin.partial import (
    ContractError,
    PartialStructure,
    literal_value,
    structure_size,
    verifies_witness,
    V0,
    V1,
)
from finprin.syntax import BasicSentence, EqLit, FunLit, RelLit, _is_numeral, formula_size


class BudgetExhausted(Exception):
    """The query bound is the honest boundary at finite scale; it fails loudly."""


@dataclass(frozen=True)
class SolverClaim:
    disjunct: int
    witness: tuple[int, ...]  # values for the existential variables, in order


@dataclass(frozen=True)
class Refutation:
    disjunct: int
    literal_index: int
    value: int  # 3-valued literal value, V0 for the refuting literal


@dataclass
class FamilyReceipt:
    family: TreeFamily
    principle: BasicSentence
    b0: int
    route: str  # "core" or "small-m"
    cost: int   # size added to the oracle


@dataclass
class Session:
    principle: BasicSentence
    model: ComputableModel
    n: int
    budget: int
    oracle: PartialOracle
    context: DensityContext
    queries_answered: int = 0
    families: list[FamilyReceipt] = field(default_factory=list)

    def structure(self) -> PartialStructure:
        return partial_of_oracle(self.oracle)


def new_session(entry_or_sentence, model: ComputableModel | None = None,
                n: int = 64, budget: int | None = None) -> Session:
    """Fresh session: empty oracle, canonical-slice embedding.

    Accepts a catalog entry (model taken from it) or an explicit sentence
    plus model.  Default budget: floor(n / r_L) - 1, which keeps the
    one-cell extension hypothesis n > size(p) * r_L available for every
    answered query.
    """
    if isinstance(entry_or_sentence, PrincipleEntry):
        sentence = entry_or_sentence.sentence
        model = model or entry_or_sentence.model
    else:
        sentence = entry_or_sentence
    if model is None:
        raise ContractError("no model registered for this principle")
    r_l = sentence.language.r_L()
    if n < r_l:
        raise ContractError(f"n must be at least r_L = {r_l}")
    if budget is None:
        budget = n // r_l - 1
    ctx = density.new_context(model, sentence, n)
    return Session(sentence, model, n, budget, empty_oracle(sentence.language, n), ctx)


def answer_query(session: Session, key) -> int:
    """Answer one oracle bit; consistent, budget-enforcing.

    Irrelevant keys answer 0 without consuming budget.  A repeat query of an
    answered cell returns the recorded bit for free; each newly defined cell
    consumes one budget unit.
    """
    lang = session.principle.language
    if not is_relevant(key, lang, session.n):
        return 0
    bit = session.oracle.bit(key)
    if bit is not None:
        return bit
    cell_defined = session.oracle.defined_cell(
        "rel" if isinstance(key, RelKey) else "fun", key.symbol, key.args
    )
    if not cell_defined:
        if session.queries_answered >= session.budget:
            raise BudgetExhausted(
                f"budget of {session.budget} answered point-queries exhausted"
            )
        session.oracle, session.context = density.extend_define(
            session.context, session.oracle, key.symbol, key.args
        )
        session.queries_answered += 1
    out = session.oracle.bit(key)
    assert out is not None
    return out


def register_tree_family(session: Session, family: TreeFamily, phi_t: BasicSentence,
                         b0: int, d_t: Callable[[int], int]) -> FamilyReceipt:
    """Force the family's derived structure to verify phi_t, now and forever.

    Chooses between the core extension (when s_L~(m) >= 2*b0*d~(m)) and the
    small-m completion.  Verification persists under every later extension
    of the session oracle by existential preservation.
    """
    from finprin.partial import s_L

    before = session.oracle.size()
    s_t = s_L(family.language, family.m)
    if s_t >= 2 * b0 * d_t(family.m):
        result = density.core_extend(
            session.context, session.oracle, family, b0, phi_t, d_t
        )
        session.oracle, session.context = result.oracle, result.context
        route = "core"
    else:
        session.oracle, session.context = density.complete_trees_small(
            session.context, session.oracle, family, b0
        )
        route = "small-m"
    receipt = FamilyReceipt(family, phi_t, b0, route, session.oracle.size() - before)
    session.families.append(receipt)
    return receipt


def refute_claim(session: Session, claim: SolverClaim) -> Refutation:
    """Define every cell the claimed disjunct mentions; return a failed literal.

    Such a literal exists: the coded structure embeds into a model
    falsifying the principle, so a fully defined claimed disjunct cannot
    have all its literals true (existential preservation would lift the
    witness into the model).
    """
    s = session.principle
    if not 0 <= claim.disjunct < len(s.matrix):
        raise ContractError(f"disjunct index {claim.disjunct} out of range")
    if len(claim.witness) != len(s.exist_vars) or any(
        not 0 <= a < session.n for a in claim.witness
    ):
        raise ContractError("claim witness must assign all variables inside [n]")
    env = dict(zip(s.exist_vars, claim.witness))
    lits = s.matrix[claim.disjunct]

    cells = []
    for lit in lits:
        if isinstance(lit, RelLit) and lit.name != "<":
            cells.append((lit.name, tuple(env[v] for v in lit.args)))
        elif isinstance(lit, FunLit) and not _is_numeral(lit.name):
            cells.append((lit.name, tuple(env[v] for v in lit.args)))
    undefined = [
        (nm, args) for nm, args in cells
        if not session.oracle.defined_cell(
            "rel" if s.language.symbol(nm).kind == "rel" else "fun", nm, args
        )
    ]
    # Every one-cell extension needs n > size * r_L at call time; the last
    # of the len(undefined) definitions is the binding one.
    if undefined and not session.n > (session.oracle.size() + len(undefined) - 1) * s.language.r_L():
        raise HypothesisError(
            f"insufficient slack to define {len(undefined)} claimed cells"
        )
    for nm, args in undefined:
        session.oracle, session.context = density.extend_define(
            session.context, session.oracle, nm, args
        )

    a = session.structure()
    for j, lit in enumerate(lits):
        v = literal_value(a, lit, env)
        if v == V0:
            return Refutation(claim.disjunct, j, v)
    raise AssertionError(
        "all claimed literals verified; this contradicts the model embedding"
    )


def session_sound(session: Session) -> bool:
    """Re-check the standing invariants from scratch."""
    density.check_context(session.context, session.oracle)
    a = session.structure()
    if verifies_witness(a, session.principle) is not None:
        return False
    for receipt in session.families:
        c = build_C(receipt.family, session.oracle)
        if verifies_witness(c, receipt.principle) is None:
            return False
    return True


def embedding_certificate(session: Session):
    """Verify the maintained embedding on the touched fragment.

    Returns (fragment, target, pi) where pi is checked cell by cell to embed
    the active fragment of the session structure into the corresponding
    induced fragment of the model; raises on violation.
    """
    from finprin.partial import active_points, induced_substructure, is_embedding

    a = session.structure()
    pts = sorted(active_points(a)) or [0]
    frag = induced_substructure(a, pts)
    e = session.context.embedding
    image = sorted(e[x] for x in pts)
    target = induced_substructure(session.model, image)
    rank = {pt: i for i, pt in enumerate(image)}
    pi = {i: rank[e[pts[i]]] for i in range(len(pts))}
    if not is_embedding(frag, target, pi):
        raise AssertionError("session fragment no longer embeds into the model")
    return frag, target, pi


# ---------------------------------------------------------------------------
# Bundled solver fixtures

def greedy_solver(session: Session, queries: int, rng) -> SolverClaim:
    """Probe cells in canonical order, then claim the first disjunct."""
    from finprin.encoding import relevant_elements

    keys = relevant_elements(session.principle.language, session.n)
    seen = {}
    for key in keys[: queries]:
        seen[key] = answer_query(session, key)
    witness = tuple(i % session.n for i in range(len(session.principle.exist_vars)))
    return SolverClaim(0, witness)


def random_solver(session: Session, queries: int, rng) -> SolverClaim:
    from finprin.encoding import relevant_elements

    keys = relevant_elements(session.principle.language, session.n)
    for _ in range(queries):
        answer_query(session, keys[rng.randrange(len(keys))])
    witness = tuple(rng.randrange(session.n) for _ in session.principle.exist_vars)
    return SolverClaim(rng.randrange(len(session.principle.matrix)), witness)


def bitprobe_then_guess_solver(session: Session, queries: int, rng) -> SolverClaim:
    """Decode whole function cells, then claim a collision-style witness."""
    lang = session.principle.language
    lb = len_bits(session.n)
    values: dict[tuple[str, tuple[int, ...]], int] = {}
    budget_left = queries
    for sym in lang.functions:
        for idx in range(session.n ** sym.arity):
            if budget_left <= 0:
                break
            args = _index_tuple(idx, sym.arity, session.n)
            acc = 0
            for i in range(lb):
                acc |= answer_query(session, FunBitKey(sym.name, args, i)) << i
            values[(sym.name, args)] = min(acc, session.n - 1)
            budget_left -= 1
        if budget_left <= 0:
            break
    # Guess a pair with equal recorded values if any, else random.
    by_val: dict[int, list] = {}
    for (nm, args), v in values.items():
        by_val.setdefault(v, []).append(args)
    pick = None
    for v, cells in by_val.items():
        if len(cells) >= 2:
            pick = (cells[0], cells[1], v)
            break
    witness = [rng.randrange(session.n) for _ in session.principle.exist_vars]
    if pick is not None and len(witness) >= 3:
        witness[0] = pick[0][0]
        witness[1] = pick[1][0]
        witness[2] = pick[2]
    return SolverClaim(0, tuple(witness))


SOLVERS = {
    "greedy": greedy_solver,
    "random": random_solver,
    "bitprobe": bitprobe_then_guess_solver,
}


def _index_tuple(idx: int, arity: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(idx % n)
        idx //= n
    return tuple(reversed(out))


@dataclass
class PlayResult:
    refuted: bool
    refutation: Optional[Refutation]
    queries: int


def play(session: Session, solver: Callable, queries: int, rng) -> PlayResult:
    """One adversarial game: the solver queries, claims, and gets refuted."""
    claim = solver(session, queries, rng)
    refutation = refute_claim(session, claim)
    return PlayResult(True, refutation, session.queries_answered)


# ---------------------------------------------------------------------------
# Line protocol on standard streams
#
#   client:  Q <key>          server:  A <bit>
#            CLAIM i a0 a1 ..           REFUTED j
#                                       BUDGET           (query bound hit)
# Keys use the canonical text form of the coding module.

def serve(session: Session, infile=None, outfile=None) -> int:
    infile = infile or sys.stdin
    outfile = outfile or sys.stdout
    for line in infile:
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "Q" and len(parts) == 2:
                key = key_from_text(parts[1])
                try:
                    bit = answer_query(session, key)
                except BudgetExhausted:
                    print("BUDGET", file=outfile, flush=True)
                    return 0
                print(f"A {bit}", file=outfile, flush=True)
            elif parts[0] == "CLAIM" and len(parts) >= 2:
                claim = SolverClaim(int(parts[1]), tuple(int(x) for x in parts[2:]))
                ref = refute_claim(session, claim)
                print(f"REFUTED {ref.literal_index}", file=outfile, flush=True)
                return 0
            else:
                print(f"ERROR unknown command {parts[0]!r}", file=outfile, flush=True)
                return 2
        except (ContractError, KeyError, ValueError) as err:
            print(f"ERROR {err}", file=outfile, flush=True)
            return 2
        except HypothesisError as err:
            print(f"HYPOTHESIS {err}", file=outfile, flush=True)
            return 3
    return 0
