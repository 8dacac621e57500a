"""Shared brute-force oracles and generators for the test suite."""
import itertools
import random
import sys

import pytest

from perfolab.graph import Graph
from perfolab.logic.syntax import (
    Adj, And, Eq, Exists, ExistsUnique, Forall, Iff, Implies, Not, Or, Rel,
)


def all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        yield Graph.from_edges(n, [p for k, p in enumerate(pairs) if bits >> k & 1])


def random_graph(n, rng, p=0.5):
    return Graph.from_edges(n, [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p])


def brute_is_unipolar(g):
    """Try every vertex subset as the central clique."""
    n = g.n
    for r in range(1, n + 1):
        for c0 in itertools.combinations(range(n), r):
            if any(not g.adjacent(a, b) for a, b in itertools.combinations(c0, 2)):
                continue
            rest = [v for v in range(n) if v not in c0]
            # rest must induce a disjoint union of cliques: adjacency is transitive
            ok = all(
                not (g.adjacent(a, b) and g.adjacent(b, c)) or g.adjacent(a, c)
                for a, b, c in itertools.permutations(rest, 3)
            )
            if ok:
                return True
    return n == 0


def brute_independent_triple(g, v):
    nb = [u for u in range(g.n) if g.adjacent(v, u)]
    return any(
        not g.adjacent(a, b) and not g.adjacent(a, c) and not g.adjacent(b, c)
        for a, b, c in itertools.combinations(nb, 3)
    )


def brute_induced_copy(g, h):
    for combo in itertools.permutations(range(g.n), h.n):
        if all(g.adjacent(combo[a], combo[b]) == h.adjacent(a, b) for a, b in itertools.combinations(range(h.n), 2)):
            return True
    return False


VARS = "xyzw"


def random_formula(rng, depth, relations=(), vars_=VARS, atom_bias=0.3):
    """Random AST with quantifier depth at most ``depth``."""
    if depth == 0 or rng.random() < atom_bias:
        k = rng.random()
        a, b = rng.choice(vars_), rng.choice(vars_)
        if relations and k < 0.25:
            name, arity = rng.choice(relations)
            return Rel(name, tuple(rng.choice(vars_) for _ in range(arity)))
        return Adj(a, b) if k < 0.65 else Eq(a, b)
    k = rng.random()
    if k < 0.15:
        return Not(random_formula(rng, depth, relations, vars_, atom_bias))
    if k < 0.5:
        op = rng.choice([And, Or, Implies, Iff])
        return op(random_formula(rng, depth - 1, relations, vars_, atom_bias),
                  random_formula(rng, depth - 1, relations, vars_, atom_bias))
    q = rng.choice([Exists, Forall, ExistsUnique])
    return q(rng.choice(vars_), random_formula(rng, depth - 1, relations, vars_, atom_bias))


@pytest.fixture
def rng():
    return random.Random(20240607)


# Sentences over adjacency and equality used to exercise the relativization.
SENTENCE_CORPUS = (
    "exists a : a = a",
    "exists a : forall b : a ~ b",
    "forall a b : a = b",
    "exists a b : a ~ b",
    "exists a b c : a ~ b & b ~ c & a ~ c",
    "forall a : exists b : a ~ b",
    "exists a b : !(a = b) & !(a ~ b)",
    "existsu a : forall b : b = a | a ~ b",
    "forall a b c : a ~ b & b ~ c -> a ~ c | a = c",
    "exists a : forall b : !(a = b) -> a ~ b",
)


def random_sentence(rng, qdepth=3, depth=5, vars_=VARS, atom_bias=0.3, bound=()):
    """Random sentence with quantifier depth at most ``qdepth`` and nesting depth at most
    ``depth``; atoms only use variables bound above them."""
    bound = list(bound)
    if not bound or (qdepth > 0 and depth > 0 and rng.random() < 0.4):
        v = rng.choice(vars_)
        q = rng.choice([Exists, Forall, ExistsUnique])
        return q(v, random_sentence(rng, qdepth - 1, depth - 1, vars_, atom_bias, bound + [v]))
    if depth <= 0 or rng.random() < atom_bias:
        a, b = rng.choice(bound), rng.choice(bound)
        return Adj(a, b) if rng.random() < 0.6 else Eq(a, b)
    if rng.random() < 0.2:
        return Not(random_sentence(rng, qdepth, depth - 1, vars_, atom_bias, bound))
    op = rng.choice([And, Or, Implies, Iff])
    return op(random_sentence(rng, qdepth, depth - 1, vars_, atom_bias, bound),
              random_sentence(rng, qdepth, depth - 1, vars_, atom_bias, bound))


def pytest_terminal_summary(terminalreporter):
    # acceptance lines are otherwise swallowed by output capture
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
