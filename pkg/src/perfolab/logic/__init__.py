"""First-order logic over graphs: syntax, parsing, and model checking."""
from .evaluator import CompiledFormula, Evaluator, compile_formula, evaluate
from .parser import format_formula, parse, tokenize
from .reference import reference_evaluate
from .structure import Relation, Structure
from .syntax import (
    Adj,
    And,
    Eq,
    Exists,
    ExistsUnique,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    all_vars,
    alpha_rename,
    complement_formula,
    conj,
    desugar_exists_unique,
    disj,
    exists,
    forall,
    free_vars,
    is_sentence,
    quantifier_depth,
    relation_names,
    size,
    substitute,
    uses_only_graph_atoms,
)

__all__ = [
    "Adj", "And", "CompiledFormula", "Eq", "Evaluator", "Exists", "ExistsUnique", "Forall",
    "Formula", "Iff", "Implies", "Not", "Or", "Rel", "Relation", "Structure", "all_vars",
    "alpha_rename", "compile_formula", "complement_formula", "conj", "desugar_exists_unique",
    "disj", "evaluate", "exists", "forall", "format_formula", "free_vars", "is_sentence",
    "parse", "quantifier_depth", "reference_evaluate", "relation_names", "size", "substitute",
    "tokenize", "uses_only_graph_atoms",
]
