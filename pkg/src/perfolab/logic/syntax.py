"""Abstract syntax of first-order formulas over graphs, plus the syntactic
transformations used elsewhere (renaming, substitution, complementation)."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from ..errors import RelationAtomError


class Formula:
    """Base class; concrete nodes are frozen dataclasses with structural equality."""

    __slots__ = ()

    def __str__(self):
        from .parser import format_formula

        return format_formula(self)


@dataclass(frozen=True, slots=True)
class Adj(Formula):
    a: str
    b: str


@dataclass(frozen=True, slots=True)
class Eq(Formula):
    a: str
    b: str


@dataclass(frozen=True, slots=True)
class Rel(Formula):
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class ExistsUnique(Formula):
    var: str
    body: Formula


ATOMS = (Adj, Eq, Rel)
BINARY = (And, Or, Implies, Iff)
QUANTIFIERS = (Forall, Exists, ExistsUnique)

VAR_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
NAME_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")
KEYWORDS = frozenset({"forall", "exists", "existsu"})


# construction helpers -------------------------------------------------------

def conj(*parts: Formula) -> Formula:
    """Left-associated conjunction of one or more formulas."""
    if not parts:
        raise ValueError("conj needs at least one operand")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Formula) -> Formula:
    if not parts:
        raise ValueError("disj needs at least one operand")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def exists(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


def forall(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Forall(v, body)
    return body


def atom_vars(f: Formula) -> tuple[str, ...]:
    if isinstance(f, Rel):
        return f.args
    return (f.a, f.b)


def _rebuild_atom(f: Formula, args: tuple[str, ...]) -> Formula:
    if isinstance(f, Rel):
        return Rel(f.name, args)
    return type(f)(*args)


# traversal ---------------------------------------------------------------

def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, BINARY):
            stack.extend((g.right, g.left))
        elif isinstance(g, QUANTIFIERS):
            stack.append(g.body)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, ATOMS):
        return frozenset(atom_vars(f))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, BINARY):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - {f.var}


def all_vars(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, ATOMS):
            out.update(atom_vars(g))
        elif isinstance(g, QUANTIFIERS):
            out.add(g.var)
    return out


def relation_names(f: Formula) -> dict[str, int]:
    """Names of Rel atoms mapped to the arity they are used with."""
    return {g.name: len(g.args) for g in subformulas(f) if isinstance(g, Rel)}


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, Not):
        return quantifier_depth(f.body)
    if isinstance(f, BINARY):
        return max(quantifier_depth(f.left), quantifier_depth(f.right))
    return 1 + quantifier_depth(f.body)


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


# renaming and substitution -----------------------------------------------

def fresh_name(base: str, taken: set[str]) -> str:
    stem = re.sub(r"_\d+\Z", "", base) or "v"
    for i in itertools.count(1):
        cand = f"{stem}_{i}"
        if cand not in taken and cand not in KEYWORDS:
            return cand
    raise AssertionError("unreachable")


def _map_vars(f: Formula, mapping: Mapping[str, str], taken: set[str], rename_bound) -> Formula:
    if isinstance(f, ATOMS):
        args = atom_vars(f)
        new = tuple(mapping.get(v, v) for v in args)
        return f if new == args else _rebuild_atom(f, new)
    if isinstance(f, Not):
        body = _map_vars(f.body, mapping, taken, rename_bound)
        return f if body is f.body else Not(body)
    if isinstance(f, BINARY):
        left = _map_vars(f.left, mapping, taken, rename_bound)
        right = _map_vars(f.right, mapping, taken, rename_bound)
        return f if (left is f.left and right is f.right) else type(f)(left, right)
    inner = {k: w for k, w in mapping.items() if k != f.var}
    var = f.var
    if rename_bound(var, inner):
        var = fresh_name(f.var, taken)
        taken.add(var)
        inner[f.var] = var
    body = _map_vars(f.body, inner, taken, rename_bound)
    return f if (var == f.var and body is f.body) else type(f)(var, body)


def alpha_rename(f: Formula, avoid: Iterable[str]) -> Formula:
    """Rename bound variables so none of them lies in ``avoid``."""
    avoid = set(avoid)
    taken = all_vars(f) | avoid
    return _map_vars(f, {}, taken, lambda v, _m: v in avoid)


def substitute(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Replace free occurrences of variables, renaming binders that would capture."""
    mapping = dict(mapping)
    taken = all_vars(f) | set(mapping) | set(mapping.values())
    return _map_vars(f, mapping, taken, lambda v, m: v in m.values())


# derived transformations -------------------------------------------------

def desugar_exists_unique(f: Formula) -> Formula:
    """Expand every ``existsu v : B`` into ``exists v : B & forall w : B[w/v] -> w = v``."""
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        return Not(desugar_exists_unique(f.body))
    if isinstance(f, BINARY):
        return type(f)(desugar_exists_unique(f.left), desugar_exists_unique(f.right))
    body = desugar_exists_unique(f.body)
    if not isinstance(f, ExistsUnique):
        return type(f)(f.var, body)
    w = fresh_name(f.var, all_vars(body) | {f.var})
    return Exists(f.var, And(body, Forall(w, Implies(substitute(body, {f.var: w}), Eq(w, f.var)))))


def complement_formula(f: Formula, literal: bool = False) -> Formula:
    """Swap adjacency for non-adjacency; equality atoms are left alone.

    Graphs are loopless, so non-adjacency in the complement also needs the two
    endpoints to differ: ``a ~ b`` becomes ``!(a ~ b) & !(a = b)`` and then
    ``G |= complement_formula(f)`` iff ``complement(G) |= f``.  With
    ``literal=True`` each atom is only negated in place, which is the textbook
    rewrite and an involution up to double negation, but it is not exact when
    two quantified variables may take the same vertex.
    """
    if isinstance(f, Rel):
        raise RelationAtomError(f"cannot complement interpreted relation {f.name}")
    if isinstance(f, Adj):
        if literal:
            return Not(f)
        if f.a == f.b:
            return f
        return And(Not(f), Not(Eq(f.a, f.b)))
    if isinstance(f, Eq):
        return f
    if isinstance(f, Not):
        return Not(complement_formula(f.body, literal))
    if isinstance(f, BINARY):
        return type(f)(complement_formula(f.left, literal), complement_formula(f.right, literal))
    return type(f)(f.var, complement_formula(f.body, literal))


def eliminate_double_negation(f: Formula) -> Formula:
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        if isinstance(f.body, Not):
            return eliminate_double_negation(f.body.body)
        return Not(eliminate_double_negation(f.body))
    if isinstance(f, BINARY):
        return type(f)(eliminate_double_negation(f.left), eliminate_double_negation(f.right))
    return type(f)(f.var, eliminate_double_negation(f.body))


def uses_only_graph_atoms(f: Formula) -> bool:
    return not any(isinstance(g, Rel) for g in subformulas(f))
