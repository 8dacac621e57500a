"""Random unipolar graphs and the random perfect graph built from them."""
from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .combinatorics import sample_central_size, sample_set_partition_labels
from .errors import ConfigError
from .graph import Graph, PartitionedGraph, complement

DEFAULT_MAX_N = 100_000
_ROW_CHUNK = 1024


def max_n() -> int:
    """Largest n the CLI will sample; ``PERFOLAB_MAX_N`` overrides the default."""
    return int(os.environ.get("PERFOLAB_MAX_N", DEFAULT_MAX_N))


@dataclass(frozen=True)
class SampleSeed:
    """Master seed plus a per-trial stream index.

    The child generator is ``PCG64`` seeded from
    ``SeedSequence(entropy=seed, spawn_key=(stream,))``, numpy's hash-based
    mixing of the pair.  Reproducible within one numpy build.
    """

    seed: int
    stream: int = 0

    def rng(self, *salt: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed & (2**64 - 1), spawn_key=(self.stream & (2**64 - 1), *salt))
        return np.random.Generator(np.random.PCG64(ss))


class Orientation(str, Enum):
    UNIPOLAR = "unipolar"
    CO_UNIPOLAR = "co-unipolar"


@dataclass(frozen=True)
class PerfectSample:
    graph: Graph
    orientation: Orientation
    witness: PartitionedGraph

    def to_json(self) -> dict:
        out = self.graph.to_json()
        out["parts"] = [list(p) for p in self.witness.parts]
        out["orientation"] = self.orientation.value
        return out


def _assemble(n: int, central: np.ndarray, rest: np.ndarray, labels: np.ndarray,
              cross: np.ndarray) -> Graph:
    """Pack rows of the unipolar graph with central clique ``central``, side cliques
    given by ``labels`` over ``rest`` and ``cross[a, b]`` the edge ``central[a]``--``rest[b]``.

    Rows are built with columns ordered ``central + rest`` and gathered back to
    vertex order in one pass.
    """
    m = len(central)
    nbytes = (n + 7) // 8
    rows = np.zeros((n, nbytes), dtype=np.uint8)
    to_vertex_order = np.argsort(np.concatenate([central, rest]), kind="stable")
    cross_t = np.ascontiguousarray(cross.T)
    for a in range(0, m, _ROW_CHUNK):
        block = np.arange(a, min(a + _ROW_CHUNK, m))
        dense = np.empty((len(block), n), dtype=bool)
        dense[:, :m] = True
        dense[np.arange(len(block)), block] = False
        dense[:, m:] = cross[block]
        rows[central[block]] = np.packbits(np.take(dense, to_vertex_order, axis=1), axis=1, bitorder="little")
    for b in range(0, len(rest), _ROW_CHUNK):
        block = np.arange(b, min(b + _ROW_CHUNK, len(rest)))
        dense = np.empty((len(block), n), dtype=bool)
        dense[:, :m] = cross_t[block]
        np.equal(labels[block][:, None], labels[None, :], out=dense[:, m:])
        dense[np.arange(len(block)), m + block] = False
        rows[rest[block]] = np.packbits(np.take(dense, to_vertex_order, axis=1), axis=1, bitorder="little")
    return Graph(n, rows)


@dataclass(frozen=True, eq=False)
class UnipolarDraw:
    """The random choices behind one unipolar sample, before the graph is packed.

    ``cross`` is bit-packed (little bit order): bit ``b`` of row ``a`` is the
    edge ``central[a]``--``rest[b]``.  Side part ``i >= 1`` is the set of
    ``rest`` positions with label ``i - 1``; labels are canonical, so parts are
    ordered by their smallest vertex.
    """

    n: int
    central: np.ndarray
    rest: np.ndarray
    labels: np.ndarray
    cross: np.ndarray

    @property
    def part_count(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def cross_dense(self, rows=None) -> np.ndarray:
        packed = self.cross if rows is None else self.cross[rows]
        return np.unpackbits(packed, axis=-1, count=len(self.rest), bitorder="little").view(bool)

    def part_order(self) -> tuple[np.ndarray, np.ndarray]:
        """``rest`` positions sorted by part, and the start offset of each part."""
        order = np.argsort(self.labels, kind="stable")
        starts = np.concatenate([[0], np.flatnonzero(np.diff(self.labels[order])) + 1]) if len(order) else order
        return order, starts.astype(np.int64)

    def part_neighborhoods(self) -> np.ndarray:
        """``(k, |central|)`` boolean matrix; row ``i - 1`` marks ``N(C_i)`` by central position."""
        k, m = self.part_count, len(self.central)
        if k == 0 or m == 0:
            return np.ones((k, m), dtype=bool)
        # transpose the bit matrix so each side vertex owns a packed row over central
        side_rows = np.empty((len(self.rest), (m + 7) // 8), dtype=np.uint8)
        for a in range(0, m, _ROW_CHUNK):
            block = np.ascontiguousarray(self.cross_dense(slice(a, a + _ROW_CHUNK)).T)
            side_rows[:, a // 8:(a + block.shape[1] + 7) // 8] = np.packbits(block, axis=1, bitorder="little")
        order, starts = self.part_order()
        packed = np.bitwise_and.reduceat(side_rows[order], starts, axis=0)
        return np.unpackbits(packed, axis=1, count=m, bitorder="little").view(bool)

    def neighborhood_sizes(self) -> np.ndarray:
        return self.part_neighborhoods().sum(axis=1)

    def part_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.part_count)

    def graph(self) -> Graph:
        return _assemble(self.n, self.central, self.rest, self.labels, self.cross_dense())

    def parts(self) -> tuple[tuple[int, ...], ...]:
        out = [tuple(self.central.tolist())]
        if len(self.rest):
            order, starts = self.part_order()
            out.extend(tuple(self.rest[chunk].tolist()) for chunk in np.split(order, starts[1:]))
        return tuple(out)

    def partitioned(self) -> PartitionedGraph:
        return PartitionedGraph(self.graph(), self.parts())


def draw_unipolar(n: int, seed: SampleSeed) -> UnipolarDraw:
    """The random choices of :func:`sample_unipolar`, without assembling the graph."""
    if n < 1:
        raise ConfigError("sample_unipolar needs n >= 1")
    rng = seed.rng()
    m = sample_central_size(n, rng)
    central = np.sort(rng.choice(n, size=m, replace=False))
    mask = np.ones(n, dtype=bool)
    mask[central] = False
    rest = np.flatnonzero(mask)
    labels = sample_set_partition_labels(len(rest), rng)
    k = len(rest)
    cross = rng.integers(0, 256, size=(m, (k + 7) // 8), dtype=np.uint8)
    return UnipolarDraw(n, central, rest, labels, cross)


def sample_unipolar(n: int, seed: SampleSeed) -> PartitionedGraph:
    """One draw of the random unipolar graph on ``n`` vertices.

    Central size from :func:`central_size_pmf`, central clique a uniform subset
    of that size, side cliques a uniform set partition of the remaining vertices
    (sorted), and each central/side pair an independent fair coin drawn in
    row-major order over ``sorted(central) x sorted(rest)``.
    """
    return draw_unipolar(n, seed).partitioned()


def sample_perfect(n: int, seed: SampleSeed) -> PerfectSample:
    """Random unipolar graph, complemented on a fair coin flip."""
    witness = sample_unipolar(n, seed)
    heads = bool(seed.rng(1).integers(0, 2))
    if heads:
        return PerfectSample(witness.graph, Orientation.UNIPOLAR, witness)
    return PerfectSample(complement(witness.graph), Orientation.CO_UNIPOLAR, witness)
