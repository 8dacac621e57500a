"""Tower / log-star arithmetic, Bell numbers, uniform set partitions and the
central-clique size law of the random unipolar graph."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError

MAX_TOWER_HEIGHT = 6
EXACT_BELL_MAX = 1000
EXACT_PMF_MAX = 64
URN_TAIL_CUTOFF = 1e-12
WINDOW_EDGE_GAP = 40.0


@dataclass(frozen=True)
class PowerOfTwo:
    """Exact stand-in for ``2 ** exponent`` when the integer itself cannot be stored.

    Only ``tower(6)`` needs this: its binary expansion has ``2 ** 65536`` digits.
    Comparisons with ordinary integers are exact.
    """

    exponent: int

    def _cmp(self, other: int) -> int:
        if isinstance(other, PowerOfTwo):
            return (self.exponent > other.exponent) - (self.exponent < other.exponent)
        other = int(other)
        if other <= 0:
            return 1
        bl = other.bit_length()
        if bl - 1 > self.exponent:
            return -1
        if bl - 1 < self.exponent:
            return 1
        return 0 if other == 1 << (bl - 1) else -1

    def __eq__(self, other):
        if isinstance(other, (int, PowerOfTwo)):
            return self._cmp(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash(("pow2", self.exponent))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0


def tower(k: int) -> int | PowerOfTwo:
    """``T(0) = 1``, ``T(k+1) = 2 ** T(k)``.

    Heights up to 5 return an ``int``; height 6 returns a :class:`PowerOfTwo`.
    """
    if k < 0:
        raise ValueError("tower height must be non-negative")
    if k > MAX_TOWER_HEIGHT:
        raise OverflowError(f"tower({k}) is beyond the supported height {MAX_TOWER_HEIGHT}")
    value = 1
    for _ in range(min(k, 5)):
        value = 1 << value
    return PowerOfTwo(value) if k == 6 else value


def log_star(x) -> int:
    """Least ``k >= 0`` with ``tower(k) >= x``."""
    if isinstance(x, PowerOfTwo):
        # T(k) >= 2**e  iff  T(k-1) >= e, for k >= 1
        return 0 if x.exponent == 0 else 1 + log_star(x.exponent)
    x = int(x)
    k, value = 0, 1
    while value < x:
        if k == 5:
            return 6 if (x - 1).bit_length() <= value else 7
        value = 1 << value
        k += 1
    return k


# Bell numbers ---------------------------------------------------------------

_bell_cache: list[int] = [1]
_bell_row: list[int] = [1]


def bell(n: int) -> int:
    """Exact Bell number via the Bell triangle (``n <= 1000``)."""
    if n < 0:
        raise ValueError("Bell numbers are defined for n >= 0")
    if n > EXACT_BELL_MAX:
        raise OverflowError(f"exact Bell numbers are tabulated up to n={EXACT_BELL_MAX}; use log_bell")
    global _bell_row
    while len(_bell_cache) <= n:
        row = [_bell_row[-1]]
        for v in _bell_row:
            row.append(row[-1] + v)
        _bell_row = row
        _bell_cache.append(row[0])
    return _bell_cache[n]


@lru_cache(maxsize=None)
def log_bell(n: int) -> float:
    """Natural log of ``B(n)`` from Dobinski's series, summed in log space."""
    if n < 0:
        raise ValueError("Bell numbers are defined for n >= 0")
    if n == 0:
        return 0.0
    # terms n ln k - ln k! peak near k ~ n / ln n; walk out until 60 nats below the peak
    hi = max(8, int(2 * n / max(1.0, math.log(n))) + 16)
    while True:
        k = np.arange(1, hi + 1, dtype=np.float64)
        logs = n * np.log(k) - _lgamma(k + 1)
        if logs[-1] < logs.max() - 60:
            break
        hi *= 2
    top = logs.max()
    return float(top + np.log(np.exp(logs - top).sum()) - 1.0)


_lgamma = np.vectorize(math.lgamma, otypes=[np.float64])


@dataclass(frozen=True)
class BellTable:
    """Bell numbers ``B(0..n_max)``, exact and as natural logs."""

    exact: tuple[int, ...]
    logs: tuple[float, ...]

    @classmethod
    def build(cls, n_max: int) -> "BellTable":
        exact = tuple(bell(k) for k in range(min(n_max, EXACT_BELL_MAX) + 1))
        return cls(exact, tuple(log_bell(k) for k in range(n_max + 1)))


def stirling2_row(m: int) -> list[int]:
    """``S(m, 0..m)``, Stirling numbers of the second kind."""
    row = [1]
    for i in range(1, m + 1):
        nxt = [0] * (i + 1)
        for k in range(1, i + 1):
            nxt[k] = k * (row[k] if k < len(row) else 0) + row[k - 1]
        row = nxt
    return row


# r-root --------------------------------------------------------------------

def solve_r(s: float) -> float:
    """Unique ``r > 0`` with ``r * exp(r) == s``, by safeguarded Newton on ``r + ln r - ln s``."""
    if not s > 0:
        raise ValueError("solve_r needs a positive right-hand side")
    log_s = math.log(s)

    def f(r):
        return r + math.log(r) - log_s

    lo, hi = 1e-300, max(1.0, log_s + 1.0)
    while f(hi) < 0:
        hi *= 2
    r = min(max(log_s - math.log(max(log_s, 1.0)), s / 2), hi) if s > 1 else s / (1 + s)
    r = min(max(r, lo), hi)
    for _ in range(200):
        val = f(r)
        if val > 0:
            hi = r
        else:
            lo = r
        step = val / (1 + 1 / r)
        nxt = r - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - r) <= 1e-16 * max(1.0, r):
            r = nxt
            break
        r = nxt
    return r


# set partitions ------------------------------------------------------------

@dataclass(frozen=True)
class SetPartition:
    """Canonical block labels of a partition of ``{0..m-1}``.

    ``labels[e]`` is the block of element ``e``; blocks are numbered by first
    appearance, so ``labels[0] == 0`` and every new block gets the next number.
    """

    labels: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def block_count(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for e, b in enumerate(self.labels):
            out[b].append(e)
        return out

    @classmethod
    def from_labels(cls, labels) -> "SetPartition":
        seen: dict[int, int] = {}
        return cls(tuple(seen.setdefault(int(b), len(seen)) for b in labels))


def canonical_labels(raw: np.ndarray) -> np.ndarray:
    """Renumber arbitrary block labels by order of first appearance."""
    raw = np.asarray(raw)
    if raw.size == 0:
        return raw.astype(np.int64)
    uniq, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    return rank[inverse.ravel()]


@lru_cache(maxsize=256)
def urn_count_distribution(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Support and probabilities of the urn count ``U`` with ``P(U=u) ∝ u**m / u!``.

    Mass is truncated where ``u**m / u!`` falls below ``URN_TAIL_CUTOFF`` times
    the running total.  ``u`` starts at 1; ``u = 0`` only carries mass for ``m = 0``.
    """
    if m == 0:
        return np.array([0]), np.array([1.0])
    peak = max(1, int(round(m / max(1.0, math.log(m)))))
    hi = max(peak * 4, 32)
    while True:
        u = np.arange(1, hi + 1, dtype=np.float64)
        logw = m * np.log(u) - _lgamma(u + 1)
        top = logw.max()
        if logw[-1] - top < math.log(URN_TAIL_CUTOFF) - 10:
            break
        hi *= 2
    w = np.exp(logw - top)
    keep = w >= URN_TAIL_CUTOFF * w.sum()
    # the weights are unimodal in u, so the kept set is an interval
    idx = np.flatnonzero(keep)
    u_kept = np.arange(idx[0] + 1, idx[-1] + 2)
    p = w[idx[0]: idx[-1] + 1]
    return u_kept, p / p.sum()


def _cdf(p: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    return cdf


def _draw_index(cdf: np.ndarray, rng: np.random.Generator) -> int:
    # same draw as ``rng.choice(len(cdf), p=...)``, without rebuilding the CDF each call
    return int(cdf.searchsorted(rng.random(), side="right"))


@lru_cache(maxsize=256)
def _urn_cdf(m: int) -> np.ndarray:
    return _cdf(urn_count_distribution(m)[1])


def sample_set_partition_labels(m: int, rng: np.random.Generator) -> np.ndarray:
    """Canonical labels of a uniform set partition of ``{0..m-1}`` (urn method)."""
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    support, _ = urn_count_distribution(m)
    urns = int(support[_draw_index(_urn_cdf(m), rng)])
    return canonical_labels(rng.integers(0, urns, size=m))


def sample_set_partition(m: int, rng: np.random.Generator) -> SetPartition:
    return SetPartition(tuple(int(b) for b in sample_set_partition_labels(m, rng)))


# central clique size -------------------------------------------------------

def central_weight(n: int, m: int) -> int:
    """Exact weight ``C(n,m) 2**(m(n-m)) B(n-m)`` of central size ``m``."""
    return math.comb(n, m) * (1 << (m * (n - m))) * bell(n - m)


def central_log_weight(n: int, m: int) -> float:
    return (
        math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)
        + m * (n - m) * math.log(2.0)
        + log_bell(n - m)
    )


def central_window(n: int) -> tuple[int, int]:
    half = 10 * math.log(n) + 20
    return max(1, math.floor(n / 2 - half)), min(n, math.ceil(n / 2 + half))


@lru_cache(maxsize=64)
def _central_pmf(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("central size law needs n >= 1")
    pmf = np.zeros(n, dtype=np.float64)
    if n <= EXACT_PMF_MAX:
        weights = [central_weight(n, m) for m in range(1, n + 1)]
        total = sum(weights)
        for m, w in enumerate(weights, start=1):
            pmf[m - 1] = float(Fraction(w, total))
        pmf.flags.writeable = False
        return pmf
    lo, hi = central_window(n)
    ms = range(lo, hi + 1)
    logw = np.array([central_log_weight(n, m) for m in ms])
    top = logw.max()
    if (lo > 1 and logw[0] > top - WINDOW_EDGE_GAP) or (hi < n and logw[-1] > top - WINDOW_EDGE_GAP):
        raise ConsistencyError(
            f"central size window [{lo}, {hi}] for n={n} truncates non-negligible mass"
        )
    w = np.exp(logw - top)
    pmf[lo - 1: hi] = w / w.sum()
    pmf.flags.writeable = False
    return pmf


def central_size_pmf(n: int) -> np.ndarray:
    """Probabilities of central sizes ``m = 1..n`` (index ``m - 1``)."""
    return _central_pmf(n)


@lru_cache(maxsize=64)
def _pmf_cdf(n: int) -> np.ndarray:
    return _cdf(central_size_pmf(n))


def sample_central_size(n: int, rng: np.random.Generator) -> int:
    pmf = central_size_pmf(n)
    return _draw_index(_pmf_cdf(n), rng) + 1


def exact_central_pmf(n: int) -> list[Fraction]:
    """Exact rational PMF, for tests and CSV dumps at small ``n``."""
    weights = [central_weight(n, m) for m in range(1, n + 1)]
    total = sum(weights)
    return [Fraction(w, total) for w in weights]
