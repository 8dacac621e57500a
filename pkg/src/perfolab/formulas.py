"""The first-order formulas that locate the unipolar structure of a random perfect
graph, their combinatorial ground truth, and the sentences composed from them.

Every builder has two modes.  In pure mode the helper predicates are inlined so
the result is a genuine sentence of the graph language.  In interpreted mode
the helpers appear as ``Rel`` atoms (``InC0``, ``CN``, ``Hedge``) meant to be
bound to :func:`oracle_tables`, which separates the logical encoding from the
probabilistic step that recognises the central clique.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import CapExceededError, InvalidVertexError, NotASentenceError, RelationAtomError
from .graph import Graph, PartitionedGraph, derived_graph, smallest_unipolar_not_counipolar
from .logic import (
    Adj,
    And,
    Eq,
    Evaluator,
    Exists,
    ExistsUnique,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    Relation,
    Structure,
    alpha_rename,
    compile_formula,
    conj,
    exists,
    free_vars,
    parse,
    substitute,
    uses_only_graph_atoms,
)

SPECTRUM_CAP = 6
ORACLE_MAX_N = 512  # the Hedge table is cubic in n


class PaperFormulaKind(str, Enum):
    IN_C0 = "InC0"
    CN = "CN"
    HEDGE = "Hedge"
    BIGGER = "Bigger"


PARAMS = {
    PaperFormulaKind.IN_C0: ("x",),
    PaperFormulaKind.CN: ("x", "y"),
    PaperFormulaKind.HEDGE: ("x", "y", "z"),
    PaperFormulaKind.BIGGER: ("x", "y"),
}

# Templates use Rel atoms for the helpers they depend on.
_TEMPLATES = {
    PaperFormulaKind.IN_C0: """
        exists x1 x2 x3 : x ~ x1 & x ~ x2 & x ~ x3
            & !(x1 = x2) & !(x1 = x3) & !(x2 = x3)
            & !(x1 ~ x2) & !(x1 ~ x3) & !(x2 ~ x3)
    """,
    PaperFormulaKind.CN: """
        InC0(x) & !InC0(y) & x ~ y
            & (forall z : !InC0(z) & z ~ y -> x ~ z)
    """,
    PaperFormulaKind.HEDGE: """
        InC0(x) & InC0(y) & !InC0(z) & !(x = y)
            & (exists z1 : (z1 = z | !InC0(z1) & z1 ~ z) & x ~ z1 & y ~ z1)
    """,
    PaperFormulaKind.BIGGER: """
        !InC0(x) & !InC0(y) & !(x = y) & !(x ~ y)
        & (exists z :
              (forall y1 : CN(y1, y) & !CN(y1, x) ->
                  (existsu x1 : CN(x1, x) & !CN(x1, y) & Hedge(x1, y1, z)))
            & (forall x1 y1 y2 : CN(x1, x) & !CN(x1, y) & CN(y1, y) & !CN(y1, x)
                  & CN(y2, y) & !CN(y2, x) & Hedge(x1, y1, z) & Hedge(x1, y2, z) -> y1 = y2)
            & (exists x1 : CN(x1, x) & !CN(x1, y)
                  & (forall y1 : CN(y1, y) & !CN(y1, x) -> !Hedge(x1, y1, z))))
    """,
}


@lru_cache(maxsize=None)
def _template(kind: PaperFormulaKind) -> Formula:
    return parse(_TEMPLATES[kind])


def inline_predicates(f: Formula, names=("InC0", "CN", "Hedge", "Bigger")) -> Formula:
    """Replace helper ``Rel`` atoms by their pure definitions, recursively."""
    if isinstance(f, Rel):
        if f.name not in names:
            return f
        kind = PaperFormulaKind(f.name)
        body = inline_predicates(_template(kind), names)
        return substitute(body, dict(zip(PARAMS[kind], f.args)))
    if isinstance(f, (Adj, Eq)):
        return f
    if isinstance(f, Not):
        return Not(inline_predicates(f.body, names))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(inline_predicates(f.left, names), inline_predicates(f.right, names))
    return type(f)(f.var, inline_predicates(f.body, names))


@lru_cache(maxsize=None)
def build_base_formula(kind: PaperFormulaKind | str, interpreted: bool = False) -> Formula:
    """Defining formula of a helper predicate with free variables ``x, y, z`` (as needed)."""
    f = _template(PaperFormulaKind(kind))
    return f if interpreted else inline_predicates(f)


def predicate_atom(kind: PaperFormulaKind | str, *args: str, interpreted: bool = True) -> Formula:
    """``kind(args)`` as a Rel atom, or inlined when ``interpreted`` is false."""
    kind = PaperFormulaKind(kind)
    atom = Rel(kind.value, tuple(args))
    return atom if interpreted else inline_predicates(atom)


# ground truth ----------------------------------------------------------------

def part_neighborhoods(pg: PartitionedGraph) -> list[np.ndarray]:
    """Boolean masks of ``N(C_i)`` for each side part ``i = 1..k`` (index ``i-1``)."""
    adj = pg.graph.dense()
    return [np.logical_and.reduce(adj[list(p)], axis=0) for p in pg.side_parts]


@dataclass(frozen=True)
class OracleTables:
    in_c0: Relation
    cn: Relation
    hedge: Relation

    def relations(self) -> dict[str, Relation]:
        return {"InC0": self.in_c0, "CN": self.cn, "Hedge": self.hedge}

    def structure(self, graph: Graph) -> Structure:
        return Structure(graph, self.relations())


def oracle_tables(pg: PartitionedGraph) -> OracleTables:
    """Intended meaning of InC0, CN and Hedge, read off the known partition."""
    n = pg.graph.n
    if n > ORACLE_MAX_N:
        raise CapExceededError(f"oracle tables are cubic in n; n={n} exceeds {ORACLE_MAX_N}")
    adj = pg.graph.dense()
    c0 = np.zeros(n, dtype=bool)
    c0[list(pg.central)] = True
    cn = np.zeros((n, n), dtype=bool)
    hedge = np.zeros((n, n, n), dtype=bool)
    for p, nb in zip(pg.side_parts, part_neighborhoods(pg)):
        members = list(p)
        cn[:, members] = (nb & c0)[:, None]
        w = (adj[:, members] & c0[:, None]).astype(np.float32)
        h = (w @ w.T) > 0
        np.fill_diagonal(h, False)
        hedge[:, :, members] = h[:, :, None]
    return OracleTables(Relation(n, 1, c0), Relation(n, 2, cn), Relation(n, 3, hedge))


def oracle_structure(pg: PartitionedGraph) -> Structure:
    return oracle_tables(pg).structure(pg.graph)


def _side_part_of(pg: PartitionedGraph, v: int) -> int:
    if not 0 <= v < pg.graph.n:
        raise InvalidVertexError(f"vertex {v} outside 0..{pg.graph.n - 1}")
    for i, p in enumerate(pg.parts):
        if v in p:
            if i == 0:
                raise InvalidVertexError(f"vertex {v} lies in the central clique")
            return i
    raise InvalidVertexError(f"vertex {v} is in no part")


def oracle_bigger(pg: PartitionedGraph, x: int, y: int) -> bool:
    """Some side part ``C_k`` wires ``N(C_j) - N(C_i)`` injectively into ``N(C_i) - N(C_j)``
    through shared neighbours, saturating the former and missing part of the latter.

    ``x`` lies in ``C_i`` and ``y`` in ``C_j``.
    """
    i, j = _side_part_of(pg, x), _side_part_of(pg, y)
    if i == j:
        return False
    nbs = part_neighborhoods(pg)
    ni, nj = nbs[i - 1], nbs[j - 1]
    a = np.flatnonzero(ni & ~nj)
    b = np.flatnonzero(nj & ~ni)
    if len(a) == 0:
        return False
    adj = pg.graph.dense()
    for p in pg.side_parts:
        members = list(p)
        wa = adj[np.ix_(a, members)].astype(np.float32)
        wb = adj[np.ix_(b, members)].astype(np.float32)
        e = (wa @ wb.T) > 0  # rows a, columns b
        if (e.sum(axis=0) == 1).all() and (e.sum(axis=1) <= 1).all() and (~e.any(axis=1)).any():
            return True
    return False


# composed sentences ------------------------------------------------------------

def _check_graph_sentence(phi: Formula) -> None:
    if free_vars(phi):
        raise NotASentenceError(f"expected a sentence, free variables {sorted(free_vars(phi))}")
    if not uses_only_graph_atoms(phi):
        raise RelationAtomError("expected a sentence over adjacency and equality only")


def relativize(phi: Formula, interpreted: bool = True) -> Formula:
    """``Phi(x, y)``: ``phi`` evaluated inside the graph on ``N(C_i)`` (``x`` in ``C_i``)
    whose edges are the pairs with a common neighbour in ``C_j`` (``y`` in ``C_j``)."""
    _check_graph_sentence(phi)
    phi = alpha_rename(phi, {"x", "y"})

    def rel(g: Formula) -> Formula:
        if isinstance(g, Adj):
            return Rel("Hedge", (g.a, g.b, "y"))
        if isinstance(g, Eq):
            return g
        if isinstance(g, Not):
            return Not(rel(g.body))
        if isinstance(g, (And, Or, Implies, Iff)):
            return type(g)(rel(g.left), rel(g.right))
        guard = Rel("CN", (g.var, "x"))
        if isinstance(g, Forall):
            return Forall(g.var, Implies(guard, rel(g.body)))
        return type(g)(g.var, And(guard, rel(g.body)))

    out = conj(Not(Rel("InC0", ("x",))), Not(Rel("InC0", ("y",))), rel(phi))
    return out if interpreted else inline_predicates(out)


def build_psi(phi: Formula, interpreted: bool = True) -> Formula:
    """``exists x y : Phi(x, y)``."""
    return exists(("x", "y"), relativize(phi, interpreted))


def build_theorem1(phi0: Formula, phi1: Formula, interpreted: bool = True) -> Formula:
    """``exists x y : Phi1(x, y) & !(exists x' y' : Bigger(x', x) & Phi0(x', y'))``."""
    big_phi1 = relativize(phi1, True)
    big_phi0 = relativize(phi0, True)
    xp, yp = "xp", "yp"
    shifted = substitute(big_phi0, {"x": xp, "y": yp})
    inner = exists((xp, yp), And(Rel("Bigger", (xp, "x")), shifted))
    out = exists(("x", "y"), And(big_phi1, Not(inner)))
    if interpreted:
        return inline_predicates(out, names=("Bigger",))
    return inline_predicates(out)


def build_unip() -> Formula:
    """The sentence saying the smallest unipolar, non-co-unipolar graph is an induced subgraph."""
    h = smallest_unipolar_not_counipolar()
    names = [f"v{i + 1}" for i in range(h.n)]
    parts = []
    for a, b in itertools.combinations(range(h.n), 2):
        parts.append(Not(Eq(names[a], names[b])))
    for a, b in itertools.combinations(range(h.n), 2):
        atom = Adj(names[a], names[b])
        parts.append(atom if h.adjacent(a, b) else Not(atom))
    return exists(names, conj(*parts))


def spectrum_contains(phi: Formula, n: int, cap: int = SPECTRUM_CAP) -> bool:
    """Whether some labelled graph on ``n`` vertices satisfies ``phi`` (exhaustive)."""
    if n > cap:
        raise CapExceededError(f"spectrum search limited to n <= {cap}, got n={n}")
    if n < 0:
        raise ValueError("n must be non-negative")
    if free_vars(phi):
        raise NotASentenceError(f"expected a sentence, free variables {sorted(free_vars(phi))}")
    if not uses_only_graph_atoms(phi):
        raise RelationAtomError("spectrum search needs a sentence over adjacency and equality")
    cf = compile_formula(phi)
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        edges = [pr for k, pr in enumerate(pairs) if bits >> k & 1]
        if Evaluator(Structure(Graph.from_edges(n, edges))).holds(cf):
            return True
    return False


def load_default_sentence(name: str) -> Formula:
    """Packaged stand-in sentences ``phi0`` and ``phi1``."""
    text = resources.files("perfolab.data").joinpath(f"{name}.fo").read_text()
    return parse(text)


def read_sentence(path) -> Formula:
    with open(path) as fh:
        return parse(fh.read())


def derived_satisfies(pg: PartitionedGraph, i: int, j: int, phi: Formula, nbs=None) -> bool:
    """``H(N(C_i), C_j) |= phi`` for side parts ``i, j >= 1``."""
    nbs = part_neighborhoods(pg) if nbs is None else nbs
    d = derived_graph(pg.graph, np.flatnonzero(nbs[i - 1]), pg.parts[j])
    return Evaluator(Structure(d.graph)).holds(phi)
