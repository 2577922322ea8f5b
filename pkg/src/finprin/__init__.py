"""Tools for finitary combinatorial principles over partial finite structures.

The library covers: a sentence DSL for existential DNF principles, 3-valued
evaluation over partial structures, exact determinacy search, oracle codings
(unary graphs, binary bit graphs, partial oracles), decision trees and the
derived structures they compute, density-extension procedures, an adversarial
oracle server for query-bounded solvers, propositional translations with CNF
export, and quantifier-free interpretations inducing many-one reductions.
"""

from finprin.syntax import (
    Language,
    Symbol,
    BasicSentence,
    parse_principle,
    render_principle,
    herbrandize,
    formula_size,
)
from finprin.partial import (
    PartialStructure,
    eval3,
    verifies,
    falsifies,
    structure_size,
    s_L,
    induced_substructure,
    find_embedding,
)

__all__ = [
    "Language",
    "Symbol",
    "BasicSentence",
    "parse_principle",
    "render_principle",
    "herbrandize",
    "formula_size",
    "PartialStructure",
    "eval3",
    "verifies",
    "falsifies",
    "structure_size",
    "s_L",
    "induced_substructure",
    "find_embedding",
]
