"""Vectorised model checking of first-order formulas over a :class:`Structure`.

A subformula is evaluated to a boolean tensor with one axis per free variable
that is not fixed by the environment.  Quantifiers reduce an axis.  Three
devices keep the tensors small:

* guards: conjuncts under ``exists v`` (antecedent conjuncts under
  ``forall v``) whose other free variables are already fixed restrict the
  candidate values of ``v`` before the body is touched;
* conjunctive contraction: ``exists v`` over a conjunction is computed as a
  sum of products with ``einsum`` instead of materialising the joint tensor;
* splitting: when a step would exceed the element budget, the outermost free
  variable (or, for a closed subformula, the quantified variable itself, with
  short-circuiting) is enumerated in Python.

Subformulas with at most two free variables are memoised per structure as
full tables keyed by their shape up to variable renaming.

On tiny structures the bookkeeping above costs more than it saves, so when
every subformula's full table has at most ``dense_limit`` cells each node is
simply computed as one table over its free variables.
"""
from __future__ import annotations

import functools
import itertools
import math
import operator
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from ..errors import InvalidVertexError, PerfolabError, UnboundVariableError, UnknownRelationError
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

DEFAULT_BUDGET = 1 << 21
DEFAULT_DENSE_LIMIT = 1 << 12
MEMO_ARITY = 2

_BINOP = {And: "and", Or: "or", Implies: "imp", Iff: "iff"}
_QOP = {Forall: "all", Exists: "ex", ExistsUnique: "ex1"}


class _Node:
    __slots__ = ("op", "var", "args", "name", "kids", "free", "free_sorted", "key",
                 "memo", "guards", "factors", "width", "pattern")

    def __init__(self, op, kids=(), var=None, args=(), name=None):
        self.op = op
        self.kids = tuple(kids)
        self.var = var
        self.args = tuple(args)
        self.name = name
        if op in ("adj", "eq", "rel"):
            free = frozenset(self.args)
        else:
            free = frozenset().union(*(k.free for k in self.kids))
            if var is not None:
                free = free - {var}
        self.free = free
        self.free_sorted = tuple(sorted(free))
        self.key = None
        self.memo = False
        self.guards = ()
        self.factors = ()
        # most free variables of any node in this subtree (counting a binder inside its scope)
        self.width = max([len(free)] + [k.width for k in self.kids])
        # atoms only: identifies the dense table of this atom up to variable names
        self.pattern = (op, name, tuple(self.free_sorted.index(a) for a in self.args), len(free))


def _conjuncts(node: _Node) -> list[_Node]:
    return list(node.kids) if node.op == "and" else [node]


def _canon(node: _Node) -> tuple:
    """Structure of ``node`` with free variables replaced by their sorted position
    and bound variables by binding depth."""
    names = {v: ("f", i) for i, v in enumerate(node.free_sorted)}

    def walk(g: _Node, depth: int):
        if g.op in ("adj", "eq", "rel"):
            return (g.op, g.name, tuple(names[a] for a in g.args))
        if g.var is not None:
            names[g.var] = ("b", depth)
            return (g.op, walk(g.kids[0], depth + 1))
        return (g.op,) + tuple(walk(k, depth) for k in g.kids)

    return walk(node, 0)


@dataclass(frozen=True, eq=False)
class CompiledFormula:
    root: _Node
    source: Formula
    free: frozenset
    relations: Mapping[str, int]


def _compile(f: Formula) -> CompiledFormula:
    counter = itertools.count()
    rels: dict[str, int] = {}

    def comp(g: Formula, ren: dict) -> _Node:
        if isinstance(g, Adj):
            return _Node("adj", args=(ren.get(g.a, g.a), ren.get(g.b, g.b)))
        if isinstance(g, Eq):
            return _Node("eq", args=(ren.get(g.a, g.a), ren.get(g.b, g.b)))
        if isinstance(g, Rel):
            if rels.setdefault(g.name, len(g.args)) != len(g.args):
                raise PerfolabError(f"relation {g.name} used with inconsistent arities")
            return _Node("rel", args=tuple(ren.get(a, a) for a in g.args), name=g.name)
        if isinstance(g, Not):
            return _Node("not", (comp(g.body, ren),))
        if isinstance(g, (And, Or)):
            op = _BINOP[type(g)]
            kids = []
            for side in (g.left, g.right):
                k = comp(side, ren)
                kids.extend(k.kids if k.op == op else (k,))
            return _Node(op, kids)
        if isinstance(g, (Implies, Iff)):
            return _Node(_BINOP[type(g)], (comp(g.left, ren), comp(g.right, ren)))
        if isinstance(g, (Forall, Exists, ExistsUnique)):
            inner = f"{g.var}#{next(counter)}"
            body = comp(g.body, {**ren, g.var: inner})
            return _Node(_QOP[type(g)], (body,), var=inner)
        raise TypeError(f"not a formula node: {g!r}")

    root = comp(f, {})
    _annotate(root)
    return CompiledFormula(root, f, root.free, rels)


def _annotate(root: _Node) -> None:
    stack = [root]
    seen = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.extend(node.kids)
        if node.op not in ("adj", "eq", "rel") and len(node.free) <= MEMO_ARITY:
            node.memo = True
            node.key = _canon(node)
        if node.var is None:
            continue
        v = node.var
        body = node.kids[0]
        pool: list[_Node] = []
        if node.op in ("ex", "ex1"):
            pool.extend(_conjuncts(body))
            inner = body
            while node.op == "ex" and inner.op == "ex":
                inner = inner.kids[0]
                pool.extend(_conjuncts(inner))
            node.factors = tuple(_conjuncts(body))
        else:
            inner = body
            while inner.op == "all":
                inner = inner.kids[0]
            if inner.op == "imp":
                pool.extend(_conjuncts(inner.kids[0]))
            if body.op == "imp":
                neg = _Node("not", (body.kids[1],))
                neg.memo = len(neg.free) <= MEMO_ARITY
                if neg.memo:
                    neg.key = _canon(neg)
                node.factors = tuple(_conjuncts(body.kids[0])) + (neg,)
            else:
                neg = _Node("not", (body,))
                neg.memo = len(neg.free) <= MEMO_ARITY
                if neg.memo:
                    neg.key = _canon(neg)
                node.factors = (neg,)
        node.guards = tuple(g for g in pool if v in g.free and (g.op in ("adj", "eq", "rel") or g.memo
                                                               or (g.op == "not" and g.kids[0].op in ("adj", "eq", "rel"))))


@lru_cache(maxsize=512)
def _compile_cached(f: Formula) -> CompiledFormula:
    return _compile(f)


# Structural hashing walks the whole tree, so the same object is looked up by
# identity first; holding ``f`` in the value keeps its id from being reused.
_BY_ID: dict[int, tuple[Formula, CompiledFormula]] = {}
_BY_ID_MAX = 4096


def compile_formula(f: Formula) -> CompiledFormula:
    """Compile once; the result can be evaluated against many structures."""
    hit = _BY_ID.get(id(f))
    if hit is not None and hit[0] is f:
        return hit[1]
    cf = _compile_cached(f)
    if len(_BY_ID) >= _BY_ID_MAX:
        _BY_ID.clear()
    _BY_ID[id(f)] = (f, cf)
    return cf


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class Evaluator:
    """Evaluates compiled formulas against one structure, sharing memo tables."""

    def __init__(self, structure: Structure, budget: int = DEFAULT_BUDGET,
                 dense_limit: int = DEFAULT_DENSE_LIMIT):
        self.structure = structure
        self.n = structure.graph.n
        self.adj = structure.graph.dense()
        self.budget = budget
        self.dense_limit = dense_limit
        self._atoms: dict = {}
        self.all_idx = np.arange(self.n)
        self.tables: dict = {}
        self.scalars: dict = {}

    # public --------------------------------------------------------------
    def prepare(self, f) -> CompiledFormula:
        cf = f if isinstance(f, CompiledFormula) else compile_formula(f)
        for name, arity in cf.relations.items():
            rel = self.structure.relations.get(name)
            if rel is None:
                raise UnknownRelationError(f"relation {name!r} is not interpreted")
            if rel.arity != arity:
                raise PerfolabError(f"relation {name!r} has arity {rel.arity}, formula uses {arity}")
        return cf

    def holds(self, f, env: Mapping[str, int] | None = None) -> bool:
        cf = self.prepare(f)
        env = dict(env or {})
        missing = cf.free - env.keys()
        if missing:
            raise UnboundVariableError(f"free variables not bound: {sorted(missing)}")
        for name, val in env.items():
            if not 0 <= int(val) < self.n:
                raise InvalidVertexError(f"{name} is bound to {val}, outside 0..{self.n - 1}")
        env = {k: int(env[k]) for k in cf.free}
        if self._use_dense(cf.root):
            return bool(self._dense(cf.root)[tuple(env[v] for v in cf.root.free_sorted)])
        arr = self._eval(cf.root, env, [], {})
        return bool(arr)

    def table(self, f, variables: Sequence[str]) -> np.ndarray:
        """Truth values of ``f`` for every assignment of ``variables`` (one axis each)."""
        cf = self.prepare(f)
        variables = list(variables)
        if len(set(variables)) != len(variables):
            raise PerfolabError("table variables must be distinct")
        missing = cf.free - set(variables)
        if missing:
            raise UnboundVariableError(f"free variables not listed: {sorted(missing)}")
        fa = [v for v in variables if v in cf.free]
        if self._use_dense(cf.root):
            arr = self._dense(cf.root).transpose([cf.root.free_sorted.index(v) for v in fa])
        else:
            dom = {v: self.all_idx for v in variables}
            arr = self._eval(cf.root, {}, variables, dom)
        arr = _align(arr, fa, variables)
        return np.broadcast_to(arr, (self.n,) * len(variables)).copy()

    # dense path for tiny structures ----------------------------------------
    def _use_dense(self, root: _Node) -> bool:
        return self.n ** root.width <= self.dense_limit

    def _dense(self, node: _Node) -> np.ndarray:
        """Full table of ``node`` with one axis per free variable, in sorted order."""
        op, fs, n = node.op, node.free_sorted, self.n
        if op in ("adj", "eq", "rel"):
            pattern = node.pattern
            hit = self._atoms.get(pattern)
            if hit is None:
                if op == "adj":
                    base = self.adj
                elif op == "eq":
                    base = np.eye(n, dtype=bool)
                else:
                    base = self.structure.relations[node.name].table
                axes = [np.arange(n).reshape([-1 if i == j else 1 for i in range(len(fs))]) for j in pattern[2]]
                hit = np.ascontiguousarray(_fit(base[tuple(axes)], (n,) * len(fs)))
                self._atoms[pattern] = hit
            return hit
        if op == "not":
            return ~self._dense(node.kids[0])
        if node.var is None:
            # the kids' free variables cover ``fs``, so broadcasting yields the full table
            kids = []
            for k in node.kids:
                arr = self._dense(k)
                if k.free_sorted != fs:
                    arr = arr.reshape([n if v in k.free else 1 for v in fs])
                kids.append(arr)
            if op == "and":
                return functools.reduce(operator.and_, kids)
            if op == "or":
                return functools.reduce(operator.or_, kids)
            if op == "imp":
                return ~kids[0] | kids[1]
            return kids[0] == kids[1]
        body = node.kids[0]
        arr = self._dense(body)
        if node.var not in body.free:
            if op == "ex":
                return arr & (n > 0)
            if op == "all":
                return arr | (n == 0)
            return arr & (n == 1)
        ax = body.free_sorted.index(node.var)
        if op == "ex":
            return arr.any(axis=ax)
        if op == "all":
            return arr.all(axis=ax)
        return arr.sum(axis=ax) == 1

    # core ----------------------------------------------------------------
    def _eval(self, node: _Node, env: dict, axes: list, dom: dict) -> np.ndarray:
        fa = [v for v in axes if v in node.free and v not in env]
        if node.memo:
            if fa:
                return self._index(self._table(node), node.free_sorted, env, fa, dom)
            skey = (node.key, tuple(env[v] for v in node.free_sorted))
            hit = self.scalars.get(skey)
            if hit is None:
                hit = self._raw(node, env, axes, dom, fa)
                self.scalars[skey] = hit
            return hit
        return self._raw(node, env, axes, dom, fa)

    def _table(self, node: _Node) -> np.ndarray:
        t = self.tables.get(node.key)
        if t is None:
            fs = list(node.free_sorted)
            t = self._raw(node, {}, fs, {v: self.all_idx for v in fs}, fs)
            t = np.ascontiguousarray(np.broadcast_to(t, (self.n,) * len(fs)))
            self.tables[node.key] = t
        return t

    def _index(self, table: np.ndarray, args: Sequence[str], env: dict, fa: list, dom: dict) -> np.ndarray:
        idx = []
        for a in args:
            if a in env:
                idx.append(env[a])
            else:
                shape = [1] * len(fa)
                shape[fa.index(a)] = -1
                idx.append(dom[a].reshape(shape))
        return np.asarray(table[tuple(idx)])

    def _shape(self, fa: list, dom: dict) -> tuple:
        return tuple(len(dom[v]) for v in fa)

    def _raw(self, node: _Node, env: dict, axes: list, dom: dict, fa: list) -> np.ndarray:
        op = node.op
        if op == "adj":
            a, b = node.args
            if a == b:
                return np.zeros(self._shape(fa, dom), dtype=bool)
            return self._index(self.adj, node.args, env, fa, dom)
        if op == "eq":
            a, b = node.args
            if a == b:
                return np.ones(self._shape(fa, dom), dtype=bool)
            return np.asarray(self._coord(a, env, fa, dom) == self._coord(b, env, fa, dom))
        if op == "rel":
            return self._index(self.structure.relations[node.name].table, node.args, env, fa, dom)
        if op == "not":
            return ~self._eval(node.kids[0], env, axes, dom)
        if op in ("and", "or"):
            shape = self._shape(fa, dom)
            acc = None
            stop = op == "and"  # value that decides the connective
            for kid in node.kids:
                kfa = [v for v in fa if v in kid.free]
                arr = _align(self._eval(kid, env, axes, dom), kfa, fa)
                acc = arr if acc is None else (acc & arr if op == "and" else acc | arr)
                if (op == "and" and not acc.any()) or (op == "or" and acc.all()):
                    return np.full(shape, not stop)
            return _fit(acc, shape)
        if op in ("imp", "iff"):
            left, right = node.kids
            la = _align(self._eval(left, env, axes, dom), [v for v in fa if v in left.free], fa)
            if op == "imp" and not la.any():
                return np.ones(self._shape(fa, dom), dtype=bool)
            ra = _align(self._eval(right, env, axes, dom), [v for v in fa if v in right.free], fa)
            out = (~la | ra) if op == "imp" else (la == ra)
            return _fit(out, self._shape(fa, dom))
        return self._quant(node, env, axes, dom, fa)

    def _coord(self, var: str, env: dict, fa: list, dom: dict):
        if var in env:
            return env[var]
        shape = [1] * len(fa)
        shape[fa.index(var)] = -1
        return dom[var].reshape(shape)

    def _candidates(self, node: _Node, env: dict) -> np.ndarray:
        v = node.var
        mask = None
        for g in node.guards:
            if all(u == v or u in env for u in g.free):
                vec = self._eval(g, env, [v], {v: self.all_idx})
                mask = vec if mask is None else mask & vec
        return self.all_idx if mask is None else np.flatnonzero(mask)

    def _quant(self, node: _Node, env: dict, axes: list, dom: dict, fa: list) -> np.ndarray:
        op, v, body = node.op, node.var, node.kids[0]
        shape = self._shape(fa, dom)
        cand = self._candidates(node, env)
        k = len(cand)
        if v not in body.free:
            arr = _align(self._eval(body, env, axes, dom), [u for u in fa if u in body.free], fa)
            if op == "ex":
                return _fit(arr & (k > 0), shape)
            if op == "all":
                return _fit(arr | (k == 0), shape)
            return _fit(arr & (k == 1), shape)

        sizes = {u: len(dom[u]) for u in fa}
        sizes[v] = k
        est = math.prod(shape)
        for f in node.factors:
            est = max(est, math.prod(sizes[u] for u in f.free if u not in env))
        if est > self.budget:
            if fa:
                u = fa[0]
                parts = [self._quant(node, {**env, u: int(x)}, axes, dom, fa[1:]) for x in dom[u]]
                if not parts:
                    return np.zeros(shape, dtype=bool)
                return np.stack(parts)
            return np.asarray(self._enumerate(node, env, axes, dom, cand))

        axes2 = axes + [v]
        dom2 = {**dom, v: cand}
        outside = np.ones(shape, dtype=bool)
        inside = []
        for f in node.factors:
            ffa = [u for u in axes2 if u in f.free and u not in env]
            arr = self._eval(f, env, axes2, dom2)
            if not arr.any():
                outside = np.zeros(shape, dtype=bool)
                inside = []
                break
            if v in ffa:
                inside.append((arr, ffa))
            else:
                outside = outside & _align(arr, ffa, fa)
        if not inside:
            hits = np.zeros(shape, dtype=np.int64)
        elif len(inside) == 1:
            arr, ffa = inside[0]
            ax = ffa.index(v)
            red = arr.sum(axis=ax) if op == "ex1" else arr.any(axis=ax)
            hits = _align(red, [u for u in ffa if u != v], fa)
        else:
            letters = {u: _LETTERS[i] for i, u in enumerate(axes2) if u in sizes}
            out_vars = [u for u in fa if any(u in ffa for _, ffa in inside)]
            spec = ",".join("".join(letters[u] for u in ffa) for _, ffa in inside)
            spec += "->" + "".join(letters[u] for u in out_vars)
            counts = np.einsum(spec, *(a.astype(np.float32) for a, _ in inside), optimize="greedy")
            hits = _align(np.rint(counts).astype(np.int64), out_vars, fa)
        if op == "ex":
            out = outside & (hits > 0)
        elif op == "ex1":
            out = outside & (hits == 1)
        else:
            out = ~(outside & (hits > 0))
        return _fit(out, shape)

    def _enumerate(self, node: _Node, env: dict, axes: list, dom: dict, cand: np.ndarray) -> bool:
        op, v, body = node.op, node.var, node.kids[0]
        count = 0
        for x in cand:
            r = bool(self._eval(body, {**env, v: int(x)}, axes, dom))
            if op == "ex" and r:
                return True
            if op == "all" and not r:
                return False
            if op == "ex1":
                count += r
                if count > 1:
                    return False
        return op == "all" or (op == "ex1" and count == 1)


def _fit(arr: np.ndarray, shape: tuple) -> np.ndarray:
    arr = np.asarray(arr)
    return arr if arr.shape == shape else np.broadcast_to(arr, shape)


def _align(arr: np.ndarray, vars_: list, target: list) -> np.ndarray:
    """Reshape ``arr`` (axes ``vars_``, a subsequence of ``target``) for broadcasting."""
    arr = np.asarray(arr)
    if list(vars_) == list(target):
        return arr
    it = iter(arr.shape)
    shape = [next(it) if u in vars_ else 1 for u in target]
    return arr.reshape(shape)


def evaluate(structure: Structure, f, env: Mapping[str, int] | None = None) -> bool:
    """Truth of ``f`` in ``structure`` under ``env`` (which must bind every free variable)."""
    return Evaluator(structure).holds(f, env)
