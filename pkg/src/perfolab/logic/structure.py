"""Graphs extended with named interpreted relations."""
from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from ..errors import InvalidVertexError, PerfolabError
from ..graph import Graph

MAX_ARITY = 3


class Relation:
    """A finite relation of arity 1..3 over the vertices ``0..n-1``.

    Held both as a set of tuples and as a dense boolean table; the two views
    are built from each other once and never mutated.
    """

    __slots__ = ("n", "arity", "table", "_tuples")

    def __init__(self, n: int, arity: int, table: np.ndarray, tuples: frozenset | None = None):
        if not 1 <= arity <= MAX_ARITY:
            raise PerfolabError(f"relation arity must be 1..{MAX_ARITY}, got {arity}")
        table = np.asarray(table, dtype=bool)
        if table.shape != (n,) * arity:
            raise PerfolabError(f"relation table has shape {table.shape}, expected {(n,) * arity}")
        table.flags.writeable = False
        self.n = n
        self.arity = arity
        self.table = table
        self._tuples = tuples

    @classmethod
    def from_tuples(cls, n: int, arity: int, tuples: Iterable) -> "Relation":
        table = np.zeros((n,) * arity, dtype=bool)
        norm = set()
        for t in tuples:
            t = (int(t),) if np.isscalar(t) else tuple(int(v) for v in t)
            if len(t) != arity:
                raise PerfolabError(f"tuple {t} does not have arity {arity}")
            if any(not 0 <= v < n for v in t):
                raise InvalidVertexError(f"tuple {t} references a vertex outside 0..{n - 1}")
            table[t] = True
            norm.add(t)
        return cls(n, arity, table, frozenset(norm))

    @property
    def tuples(self) -> frozenset:
        if self._tuples is None:
            self._tuples = frozenset(tuple(int(v) for v in t) for t in np.argwhere(self.table))
        return self._tuples

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        return self.arity == other.arity and np.array_equal(self.table, other.table)

    def __repr__(self):
        return f"Relation(arity={self.arity}, size={int(self.table.sum())})"


class Structure:
    """A graph plus named relations; quantifiers range over the graph's vertices."""

    def __init__(self, graph: Graph, relations: Mapping[str, Relation] | None = None):
        self.graph = graph
        rels = dict(relations or {})
        for name, rel in rels.items():
            if not isinstance(rel, Relation):
                raise PerfolabError(f"relation {name!r} must be a Relation")
            if rel.n != graph.n:
                raise PerfolabError(f"relation {name!r} is over {rel.n} vertices, graph has {graph.n}")
        self.relations = rels

    @property
    def n(self) -> int:
        return self.graph.n

    def with_relations(self, **relations: Relation) -> "Structure":
        return Structure(self.graph, {**self.relations, **relations})
