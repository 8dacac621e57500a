import itertools
import random

import numpy as np
import pytest

from conftest import all_graphs, random_formula, random_graph, random_sentence
from perfolab.errors import (
    FormulaSyntaxError, InvalidVertexError, RelationAtomError, UnboundVariableError, UnknownRelationError,
)
from perfolab.graph import Graph, complement
from perfolab.logic import (
    Adj, And, Eq, Evaluator, Exists, Forall, Not, Or, Rel, Relation, Structure, alpha_rename,
    complement_formula, desugar_exists_unique, evaluate, format_formula, free_vars, parse,
    reference_evaluate,
)
from perfolab.logic.syntax import eliminate_double_negation

TRIANGLE_FREE = "!(exists x y z : x ~ y & x ~ z & y ~ z)"
RELS = (("P", 1), ("R", 2), ("T", 3))


def random_structure(n, rng):
    g = random_graph(n, rng)
    nrng = np.random.default_rng(rng.randrange(1 << 30))
    rels = {name: Relation(n, k, nrng.random((n,) * k) < 0.4) for name, k in RELS}
    return Structure(g, rels)


def closed_formula(rng, depth=3, relations=()):
    """Random formula closed off by quantifying its free variables."""
    f = random_formula(rng, depth, relations)
    for v in sorted(free_vars(f)):
        f = Exists(v, f) if rng.random() < 0.5 else Forall(v, f)
    return f


def test_parse_examples():
    f = parse(TRIANGLE_FREE)
    x, y, z = "x", "y", "z"
    body = And(And(Adj(x, y), Adj(x, z)), Adj(y, z))
    assert f == Not(Exists(x, Exists(y, Exists(z, body))))
    assert format_formula(parse("forall x : x = x")) == "forall x : x = x"
    assert parse("existsu x : P(x)") == parse("existsu x : (P(x))")
    assert parse("a = a -> b = c -> d ~ e") == parse("a = a -> (b = c -> d ~ e)")
    assert parse("x ~ y & y ~ z | x = z") == Or(And(Adj("x", "y"), Adj("y", "z")), Eq("x", "z"))


def test_triangle_free_semantics():
    f = parse(TRIANGLE_FREE)
    k3 = Graph.complete(3)
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    for ev in (evaluate, reference_evaluate):
        assert ev(Structure(k3), f) is False
        assert ev(Structure(path), f) is True


@pytest.mark.parametrize("text,line,col", [
    ("exists x : x ~", 1, 15),
    ("forall x :\n  x # y", 2, 5),
    ("existsu x y : x = y", 1, 11),
    ("x ~ y )", 1, 7),
    ("P(x", 1, 4),
])
def test_syntax_errors(text, line, col):
    with pytest.raises(FormulaSyntaxError) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_round_trip_random(rng):
    for _ in range(1000):
        f = random_formula(rng, rng.randint(0, 4), RELS)
        text = format_formula(f)
        assert parse(text) == f
        assert format_formula(parse(text)) == text


@pytest.mark.parametrize("dense_limit", [0, 1 << 12])
def test_production_matches_reference_small(dense_limit):
    """``dense_limit=0`` forces the guarded/contracting engine even on tiny graphs."""
    rng = random.Random(1)
    graphs = [g for n in range(5) for g in all_graphs(n)]
    formulas = [random_sentence(rng) for _ in range(150)]
    for g in graphs:
        s = Structure(g)
        ev = Evaluator(s, dense_limit=dense_limit)
        for f in formulas:
            assert ev.holds(f) == reference_evaluate(s, f), format_formula(f)


@pytest.mark.parametrize("dense_limit", [0, 1 << 12])
def test_production_matches_reference_with_relations_and_env(rng, dense_limit):
    for _ in range(400):
        n = rng.randint(0, 6)
        s = random_structure(n, rng)
        f = random_formula(rng, 3, RELS)
        if free_vars(f) and n == 0:
            continue
        env = {v: rng.randrange(n) for v in free_vars(f)}
        ev = Evaluator(s, dense_limit=dense_limit)
        assert ev.holds(f, env) == reference_evaluate(s, f, env), format_formula(f)
        vs = sorted(free_vars(f))[:2]
        if len(free_vars(f)) <= 2 and vs:
            table = ev.table(f, vs)
            for point in itertools.product(range(n), repeat=len(vs)):
                assert table[point] == reference_evaluate(s, f, dict(zip(vs, point)))


def test_small_budget_paths(rng):
    """Tiny budgets force the loop and enumeration fallbacks."""
    for _ in range(150):
        n = rng.randint(1, 7)
        s = random_structure(n, rng)
        f = closed_formula(rng, 4, RELS)
        assert Evaluator(s, budget=4, dense_limit=0).holds(f) == reference_evaluate(s, f)


def test_table():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    ev = Evaluator(Structure(g))
    t = ev.table(parse("exists z : x ~ z & z ~ y"), ["x", "y"])
    a = g.dense().astype(int)
    assert np.array_equal(t, (a @ a) > 0)


def test_alpha_rename():
    f = parse("exists x : x ~ y")
    r = alpha_rename(f, {"x"})
    assert isinstance(r, Exists) and r.var != "x" and r.body == Adj(r.var, "y")
    assert free_vars(r) == {"y"}


def test_alpha_rename_invariance(rng):
    for _ in range(500):
        n = rng.randint(1, 5)
        s = random_structure(n, rng)
        f = random_formula(rng, 3, RELS)
        env = {v: rng.randrange(n) for v in free_vars(f)}
        r = alpha_rename(f, {"x", "y", "z", "w"})
        assert free_vars(r) == free_vars(f)
        assert reference_evaluate(s, r, env) == reference_evaluate(s, f, env)


def test_complement_examples():
    f = parse("exists x y : x ~ y")
    assert complement_formula(f, literal=True) == parse("exists x y : !(x ~ y)")
    assert complement_formula(f) == parse("exists x y : !(x ~ y) & !(x = y)")
    f = parse("forall x : exists y : x = y")
    assert complement_formula(f) == f
    with pytest.raises(RelationAtomError):
        complement_formula(parse("exists x : P(x)"))


def test_complement_duality(rng):
    for _ in range(500):
        n = rng.randint(0, 8)
        g = random_graph(n, rng)
        f = random_sentence(rng)
        assert evaluate(Structure(g), complement_formula(f)) == evaluate(Structure(complement(g)), f)


def test_complement_involution(rng):
    for _ in range(300):
        f = random_formula(rng, 3)
        twice = complement_formula(complement_formula(f, literal=True), literal=True)
        assert eliminate_double_negation(twice) == eliminate_double_negation(f)
        n = rng.randint(0, 5)
        s = Structure(random_graph(n, rng))
        g = random_sentence(rng)
        assert evaluate(s, complement_formula(complement_formula(g))) == evaluate(s, g)


def test_de_morgan_and_double_negation(rng):
    for _ in range(300):
        n = rng.randint(1, 5)
        s = random_structure(n, rng)
        f, g = closed_formula(rng, 2, RELS), closed_formula(rng, 2, RELS)
        assert evaluate(s, Not(Not(f))) == evaluate(s, f)
        assert evaluate(s, Not(And(f, g))) == evaluate(s, Or(Not(f), Not(g)))


def test_exists_unique_desugaring(rng):
    for _ in range(300):
        n = rng.randint(1, 5)
        s = random_structure(n, rng)
        f = closed_formula(rng, 3, RELS)
        d = desugar_exists_unique(f)
        assert "existsu" not in format_formula(d)
        assert evaluate(s, d) == evaluate(s, f) == reference_evaluate(s, d)


def test_errors():
    s = Structure(Graph.complete(3))
    with pytest.raises(UnboundVariableError):
        evaluate(s, parse("x ~ y"), {"x": 0})
    with pytest.raises(UnboundVariableError):
        reference_evaluate(s, parse("x ~ y"), {"x": 0})
    with pytest.raises(UnknownRelationError):
        evaluate(s, parse("exists x : P(x)"))
    with pytest.raises(InvalidVertexError):
        evaluate(s, parse("x ~ y"), {"x": 0, "y": 3})
    with pytest.raises(InvalidVertexError):
        Relation.from_tuples(3, 1, [5])


def test_empty_graph():
    s = Structure(Graph.empty(0))
    for text, expected in [("exists x : x = x", False), ("forall x : x ~ x", True),
                           ("existsu x : x = x", False), ("!(exists x : x = x)", True)]:
        assert evaluate(s, parse(text)) is expected
        assert reference_evaluate(s, parse(text)) is expected


def test_relation_atoms():
    g = Graph.empty(3)
    r = Relation.from_tuples(3, 3, [(0, 1, 2)])
    s = Structure(g, {"T": r})
    assert evaluate(s, parse("exists a b c : T(a, b, c) & !(a = b)"))
    assert not evaluate(s, parse("exists a : T(a, a, a)"))
    assert evaluate(s, Rel("T", ("x", "y", "z")), {"x": 0, "y": 1, "z": 2})
    assert not evaluate(s, Eq("x", "y"), {"x": 0, "y": 1})
