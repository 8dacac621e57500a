"""Bit-packed simple graphs and the clique-partition constructions built on them.

Adjacency rows are stored as ``uint8`` arrays packed with ``bitorder="little"``,
so vertex ``j`` lives in byte ``j >> 3`` at bit ``j & 7``.  The same layout read
as a little-endian Python integer gives a bitmask where bit ``j`` is vertex ``j``;
the small-graph routines (unipolar search, stable-triple test) work on those
integers directly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import CapExceededError, InvalidVertexError, PerfolabError

DEFAULT_UNIPOLAR_CAP = 16


def _iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class VertexSet:
    """Immutable set of vertices of an ``n``-vertex graph, held as a bitmask."""

    n: int
    mask: int = 0

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n:
            raise InvalidVertexError(f"vertex set has members outside 0..{self.n - 1}")

    @classmethod
    def of(cls, n: int, vertices: Iterable[int]) -> "VertexSet":
        mask = 0
        for v in vertices:
            v = int(v)
            if not 0 <= v < n:
                raise InvalidVertexError(f"vertex {v} not in 0..{n - 1}")
            mask |= 1 << v
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_bools(cls, flags: np.ndarray) -> "VertexSet":
        flags = np.asarray(flags, dtype=bool)
        packed = np.packbits(flags, bitorder="little")
        return cls(len(flags), int.from_bytes(packed.tobytes(), "little"))

    def members(self) -> tuple[int, ...]:
        return tuple(_iter_bits(self.mask))

    def to_bools(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.mask.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, count=self.n, bitorder="little").astype(bool)

    def __iter__(self):
        return _iter_bits(self.mask)

    def __len__(self):
        return self.mask.bit_count()

    def __contains__(self, v) -> bool:
        return 0 <= v < self.n and bool(self.mask >> v & 1)

    def _check(self, other: "VertexSet"):
        if other.n != self.n:
            raise PerfolabError("vertex sets belong to graphs of different order")

    def __and__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.n, self.mask & other.mask)

    def __or__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.n, self.mask | other.mask)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.n, self.mask & ~other.mask)

    def __le__(self, other: "VertexSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def __repr__(self):
        return f"VertexSet(n={self.n}, {set(self.members()) or '{}'})"


class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Instances are treated as immutable; the packed row array is marked
    read-only and the lazily built caches only ever hold derived data.
    """

    __slots__ = ("n", "_rows", "_ints", "_dense")

    def __init__(self, n: int, rows: np.ndarray):
        rows = np.ascontiguousarray(rows, dtype=np.uint8)
        if rows.shape != (n, (n + 7) // 8):
            raise PerfolabError(f"packed rows have shape {rows.shape}, expected {(n, (n + 7) // 8)}")
        rows.flags.writeable = False
        self.n = n
        self._rows = rows
        self._ints = None
        self._dense = None

    # construction -------------------------------------------------------
    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, np.zeros((n, (n + 7) // 8), dtype=np.uint8))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return complement(cls.empty(n))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidVertexError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise PerfolabError(f"self-loop at vertex {u}")
            adj[u, v] = adj[v, u] = True
        return cls.from_dense(adj)

    @classmethod
    def from_dense(cls, adj: np.ndarray) -> "Graph":
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise PerfolabError("adjacency matrix must be square")
        if n and (adj.diagonal().any() or not np.array_equal(adj, adj.T)):
            raise PerfolabError("adjacency matrix must be symmetric with an empty diagonal")
        return cls(n, np.packbits(adj, axis=1, bitorder="little").reshape(n, (n + 7) // 8))

    @classmethod
    def from_row_masks(cls, n: int, masks: Sequence[int]) -> "Graph":
        nbytes = (n + 7) // 8
        buf = b"".join(m.to_bytes(nbytes, "little") for m in masks)
        g = cls(n, np.frombuffer(buf, dtype=np.uint8).reshape(n, nbytes).copy())
        return g

    # access -------------------------------------------------------------
    @property
    def packed_rows(self) -> np.ndarray:
        return self._rows

    def row_masks(self) -> list[int]:
        if self._ints is None:
            self._ints = [int.from_bytes(r.tobytes(), "little") for r in self._rows]
        return self._ints

    def dense(self) -> np.ndarray:
        """Boolean ``n x n`` adjacency matrix (cached, read-only)."""
        if self._dense is None:
            d = np.unpackbits(self._rows, axis=1, count=self.n, bitorder="little").astype(bool)
            d.flags.writeable = False
            self._dense = d
        return self._dense

    def _check_vertex(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.n:
            raise InvalidVertexError(f"vertex {v} not in 0..{self.n - 1}")
        return v

    def adjacent(self, u: int, v: int) -> bool:
        u, v = self._check_vertex(u), self._check_vertex(v)
        return bool(self._rows[u, v >> 3] >> (v & 7) & 1)

    def neighbors(self, v: int) -> VertexSet:
        v = self._check_vertex(v)
        return VertexSet(self.n, self.row_masks()[v])

    def degrees(self) -> np.ndarray:
        return np.unpackbits(self._rows, axis=1, bitorder="little").sum(axis=1)

    def edge_count(self) -> int:
        return int(self.degrees().sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u, mask in enumerate(self.row_masks()):
            out.extend((u, v) for v in _iter_bits(mask >> (u + 1) << (u + 1)))
        return out

    def induced_subgraph(self, vertices: Sequence[int]) -> "Graph":
        idx = np.array([self._check_vertex(v) for v in vertices], dtype=np.intp)
        sub = np.unpackbits(self._rows[idx], axis=1, count=self.n, bitorder="little")[:, idx]
        return Graph.from_dense(sub.astype(bool))

    # value semantics ----------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._rows, other._rows)

    def __hash__(self):
        return hash((self.n, self._rows.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.edge_count()})"

    # interchange format -------------------------------------------------
    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[u, v] for u, v in self.edges()]}

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        return cls.from_edges(int(obj["n"]), obj.get("edges", []))


def complement(g: Graph) -> Graph:
    n = g.n
    rows = np.bitwise_not(g.packed_rows)
    if n % 8:
        rows[:, -1] &= np.uint8((1 << (n % 8)) - 1)
    idx = np.arange(n)
    rows[idx, idx >> 3] &= ~np.left_shift(np.uint8(1), (idx & 7).astype(np.uint8))
    return Graph(n, rows)


def _as_vertex_set(g: Graph, s) -> VertexSet:
    if isinstance(s, VertexSet):
        if s.n != g.n:
            raise InvalidVertexError("vertex set built for a graph of different order")
        return s
    return VertexSet.of(g.n, s)


def common_neighborhood(g: Graph, s) -> VertexSet:
    """Vertices adjacent to every member of ``s``; all vertices when ``s`` is empty."""
    s = _as_vertex_set(g, s)
    members = s.members()
    if not members:
        return VertexSet.full(g.n)
    packed = np.bitwise_and.reduce(g.packed_rows[list(members)], axis=0)
    return VertexSet(g.n, int.from_bytes(packed.tobytes(), "little"))


class DerivedGraph(NamedTuple):
    graph: Graph
    vertex_map: tuple[int, ...]  # new index -> original vertex


def derived_graph(g: Graph, s, t) -> DerivedGraph:
    """Graph on ``s`` with ``ab`` an edge iff some vertex of ``t`` is adjacent to both.

    ``s`` is re-indexed to ``0..|s|-1`` in increasing vertex order.
    """
    s = _as_vertex_set(g, s).members()
    t = _as_vertex_set(g, t).members()
    k = len(s)
    if not t or k < 2:
        return DerivedGraph(Graph.empty(k), s)
    witness = np.unpackbits(g.packed_rows[list(t)], axis=1, count=g.n, bitorder="little")[:, list(s)]
    w = witness.astype(np.float32)
    adj = (w.T @ w) > 0
    np.fill_diagonal(adj, False)
    return DerivedGraph(Graph.from_dense(adj), s)


def has_independent_triple_in_neighborhood(g: Graph, v: int) -> bool:
    """True iff ``N(v)`` contains three pairwise non-adjacent vertices."""
    v = g._check_vertex(v)
    rows = g.row_masks()
    nv = rows[v]
    for u in _iter_bits(nv):
        # candidates above u, inside N(v), not adjacent to u
        cand = (nv & ~rows[u]) >> (u + 1) << (u + 1)
        for w in _iter_bits(cand):
            if (cand & ~rows[w]) >> (w + 1):
                return True
    return False


@dataclass(frozen=True)
class PartitionedGraph:
    """A graph with its unipolar witness: central clique ``parts[0]`` and side cliques."""

    graph: Graph
    parts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(tuple(sorted(int(v) for v in p)) for p in self.parts))

    @property
    def central(self) -> tuple[int, ...]:
        return self.parts[0]

    @property
    def side_parts(self) -> tuple[tuple[int, ...], ...]:
        return self.parts[1:]

    def part_index(self) -> np.ndarray:
        """Array mapping each vertex to its part number (0 for the central clique)."""
        idx = np.full(self.graph.n, -1, dtype=np.int64)
        for i, p in enumerate(self.parts):
            idx[list(p)] = i
        return idx

    def validate(self) -> None:
        """Raise ``PerfolabError`` unless the unipolar structure holds exactly."""
        g = self.graph
        n = g.n
        if not self.parts:
            raise PerfolabError("a partitioned graph needs at least the central part")
        seen = 0
        for i, p in enumerate(self.parts):
            if i > 0 and not p:
                raise PerfolabError(f"side part {i} is empty")
            for v in p:
                if not 0 <= v < n:
                    raise InvalidVertexError(f"part {i} lists vertex {v} outside 0..{n - 1}")
                if seen >> v & 1:
                    raise PerfolabError(f"vertex {v} appears in more than one part")
                seen |= 1 << v
        if seen != (1 << n) - 1:
            raise PerfolabError("parts do not cover every vertex")
        if n and not self.parts[0]:
            raise PerfolabError("central clique is empty on a non-empty graph")
        rows = g.row_masks()
        side = seen & ~VertexSet.of(n, self.parts[0]).mask
        for i, p in enumerate(self.parts):
            pmask = VertexSet.of(n, p).mask
            for v in p:
                if (pmask & ~(1 << v)) & ~rows[v]:
                    raise PerfolabError(f"part {i} is not a clique")
                if i > 0 and rows[v] & side & ~pmask:
                    raise PerfolabError(f"side part {i} has an edge to another side part")

    def to_json(self) -> dict:
        out = self.graph.to_json()
        out["parts"] = [list(p) for p in self.parts]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PartitionedGraph":
        return cls(Graph.from_json(obj), tuple(tuple(p) for p in obj["parts"]))


def _cluster_parts(rows: Sequence[int], rest: int) -> list[int] | None:
    """Split ``rest`` into cliques if its induced subgraph is a disjoint union of cliques."""
    parts = []
    while rest:
        low = rest & -rest
        u = low.bit_length() - 1
        comp = (rows[u] & rest) | low
        for w in _iter_bits(comp):
            if (rows[w] & rest) | (1 << w) != comp:
                return None
        parts.append(comp)
        rest &= ~comp
    return parts


def _unipolar_masks(rows: Sequence[int], n: int) -> list[int] | None:
    if n == 0:
        return [0]
    full = (1 << n) - 1
    # depth-first over non-empty cliques, smallest vertex first
    stack = [(1 << v, rows[v] & ~((1 << (v + 1)) - 1)) for v in reversed(range(n))]
    while stack:
        clique, cand = stack.pop()
        side = _cluster_parts(rows, full & ~clique)
        if side is not None:
            return [clique] + side
        for w in reversed(list(_iter_bits(cand))):
            stack.append((clique | (1 << w), cand & rows[w] & ~((1 << (w + 1)) - 1)))
    return None


def unipolar_partition(g: Graph, cap: int = DEFAULT_UNIPOLAR_CAP) -> PartitionedGraph | None:
    """A unipolar witness for ``g`` found by exhaustive clique search, or ``None``."""
    if g.n > cap:
        raise CapExceededError(f"unipolar search is exhaustive; n={g.n} exceeds cap {cap}")
    masks = _unipolar_masks(g.row_masks(), g.n)
    if masks is None:
        return None
    return PartitionedGraph(g, tuple(tuple(_iter_bits(m)) for m in masks))


def is_unipolar(g: Graph, cap: int = DEFAULT_UNIPOLAR_CAP) -> bool:
    return unipolar_partition(g, cap) is not None


def _graphs_in_lex_order(n: int) -> Iterator[list[int]]:
    """Row masks of every labelled graph on ``n`` vertices.

    Order: lexicographic on the edge-indicator vector indexed by the pairs
    ``(0,1), (0,2), ...`` in lexicographic order, absent before present.
    """
    pairs = list(itertools.combinations(range(n), 2))
    p = len(pairs)
    for code in range(1 << p):
        rows = [0] * n
        for k, (u, v) in enumerate(pairs):
            if code >> (p - 1 - k) & 1:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
        yield rows


@lru_cache(maxsize=None)
def smallest_unipolar_not_counipolar(max_n: int = 8) -> Graph:
    """First graph, by vertex count then lexicographic edge vector, that is unipolar
    while its complement is not."""
    for n in range(1, max_n + 1):
        full = (1 << n) - 1
        for rows in _graphs_in_lex_order(n):
            if _unipolar_masks(rows, n) is None:
                continue
            co = [full & ~r & ~(1 << v) for v, r in enumerate(rows)]
            if _unipolar_masks(co, n) is None:
                return Graph.from_row_masks(n, rows)
    raise PerfolabError(f"no unipolar, non-co-unipolar graph with at most {max_n} vertices")
