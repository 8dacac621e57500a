"""Naive Tarskian evaluator: no memoisation, no vectorisation, no domain pruning.

It exists to be obviously correct; the production evaluator is tested against it.
"""
from __future__ import annotations

from typing import Mapping

from ..errors import UnboundVariableError, UnknownRelationError
from .structure import Structure
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
)


def reference_evaluate(s: Structure, f: Formula, env: Mapping[str, int] | None = None) -> bool:
    env = dict(env or {})
    adj = s.graph.row_masks()
    n = s.graph.n

    def look(v: str) -> int:
        try:
            return env[v]
        except KeyError:
            raise UnboundVariableError(f"variable {v!r} is not bound") from None

    def quantify(g: Formula) -> bool:
        """Try ``g.var`` = 0..n-1 in order, restoring the outer binding afterwards."""
        var, kind = g.var, type(g)
        had, old = var in env, env.get(var)
        hits = 0
        try:
            for a in range(n):
                env[var] = a
                value = ev(g.body)
                if kind is Forall and not value:
                    return False
                if kind is Exists and value:
                    return True
                hits += value
            return kind is Forall or (kind is ExistsUnique and hits == 1)
        finally:
            if had:
                env[var] = old
            else:
                env.pop(var, None)

    def ev(g: Formula) -> bool:
        t = type(g)
        if t is Adj:
            try:
                return bool(adj[env[g.a]] >> env[g.b] & 1)
            except KeyError:
                look(g.a), look(g.b)
        if t is Eq:
            try:
                return env[g.a] == env[g.b]
            except KeyError:
                look(g.a), look(g.b)
        if t is Rel:
            if g.name not in s.relations:
                raise UnknownRelationError(f"relation {g.name!r} is not interpreted")
            return tuple(look(v) for v in g.args) in s.relations[g.name].tuples
        if t is Not:
            return not ev(g.body)
        if t is And:
            return ev(g.left) and ev(g.right)
        if t is Or:
            return ev(g.left) or ev(g.right)
        if t is Implies:
            return (not ev(g.left)) or ev(g.right)
        if t is Iff:
            return ev(g.left) == ev(g.right)
        if t is Forall or t is Exists or t is ExistsUnique:
            return quantify(g)
        raise TypeError(f"not a formula node: {g!r}")

    return ev(f)
