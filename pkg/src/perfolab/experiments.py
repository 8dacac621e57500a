"""Seeded Monte Carlo experiments and their JSON/CSV reports.

Every trial ``s`` draws from ``SampleSeed(cfg.seed, s)``, so a report is a
pure function of its config; only the wall-clock field varies between runs.
Large-n experiments use combinatorial oracles on the sampler's raw draws;
genuine first-order evaluation is limited to small n by a cost guard.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import stats

from .combinatorics import solve_r
from .errors import ConfigError, CostGuardError
from .formulas import build_theorem1, load_default_sentence, oracle_structure
from .graph import Graph, complement, has_independent_triple_in_neighborhood
from .logic import Evaluator, Formula, Structure, compile_formula, format_formula, free_vars, parse
from .sampler import PerfectSample, SampleSeed, draw_unipolar, max_n, sample_perfect, sample_unipolar

FULL_FO_MAX_N = 300
DEFAULT_MAX_PAIRS = 100
DEFAULT_CORE_CAP = 4  # floor for the dichotomy scan; the default is max(2 * ell, this)
ELL_EXPERIMENTS = ("criterion", "rightsize", "realise", "dichotomy")
EXPERIMENTS = ELL_EXPERIMENTS + ("frequency", "theorem1")


def ell(n: int) -> int:
    """``ceil(ln ln ln n)``; undefined below n = 16."""
    if n < 16:
        raise ConfigError(f"ell needs n >= 16 (ln ln ln n is undefined or negative), got {n}")
    return math.ceil(math.log(math.log(math.log(n))))


def t_param(n: int) -> int:
    """``ceil(sqrt(ln n))``, recorded for reports only."""
    return math.ceil(math.sqrt(math.log(n))) if n > 1 else 0


def wilson_interval(k: int, trials: int, confidence: float = 0.95) -> list[float] | None:
    if trials == 0:
        return None
    ci = stats.binomtest(k, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return [float(ci.low), float(ci.high)]


def _frequency_metrics(k: int, trials: int) -> dict:
    return {"count": k, "trials": trials, "frequency": k / trials if trials else None,
            "wilson95": wilson_interval(k, trials)}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int
    trials: int
    seed: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.n > max_n():
            raise ConfigError(f"n={self.n} exceeds the limit {max_n()} (set PERFOLAB_MAX_N to raise it)")
        if self.experiment in ELL_EXPERIMENTS:
            ell(self.n)
        object.__setattr__(self, "params", dict(self.params))

    def derived(self) -> dict:
        return {
            "ell": ell(self.n) if self.n >= 16 else None,
            "t": t_param(self.n),
            "r": solve_r(self.n / 2),  # at the typical side size; per-trial values use n - |C_0|
        }

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "n": self.n, "trials": self.trials, "seed": self.seed,
                "params": dict(sorted(self.params.items())), **self.derived()}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ExperimentConfig":
        return cls(obj["experiment"], int(obj["n"]), int(obj["trials"]), int(obj.get("seed", 0)),
                   dict(obj.get("params", {})))

    def seeds(self) -> list[SampleSeed]:
        return [SampleSeed(self.seed, s) for s in range(self.trials)]


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    metrics: dict
    trials: list[dict]
    wall_clock_seconds: float = 0.0

    def to_dict(self, include_wall_clock: bool = True) -> dict:
        out = {"experiment": self.experiment, "config": self.config, "metrics": self.metrics,
               "trials": self.trials}
        if include_wall_clock:
            out["wall_clock_seconds"] = self.wall_clock_seconds
        return out

    def to_json(self, include_wall_clock: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_clock), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        obj = json.loads(text)
        return cls(obj["experiment"], obj["config"], obj["metrics"], obj["trials"],
                   obj.get("wall_clock_seconds", 0.0))

    def to_csv(self) -> str:
        """One row per trial; nested values are JSON-encoded."""
        keys = sorted({k for rec in self.trials for k in rec})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        for rec in self.trials:
            row = []
            for k in keys:
                v = rec.get(k)
                row.append(json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else ("" if v is None else v))
            writer.writerow(row)
        return buf.getvalue()


def _run_trials(fn: Callable[[SampleSeed], dict], cfg: ExperimentConfig, workers: int = 1) -> list[dict]:
    seeds = cfg.seeds()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(fn, seeds))
    else:
        records = [fn(s) for s in seeds]
    return [{"stream": s.stream, **rec} for s, rec in zip(seeds, records)]


def _report(cfg: ExperimentConfig, metrics: dict, trials: list[dict], started: float) -> ExperimentReport:
    return ExperimentReport(cfg.experiment, cfg.to_dict(), metrics, trials, time.perf_counter() - started)


def _require(cfg: ExperimentConfig, name: str) -> None:
    if cfg.experiment != name:
        raise ConfigError(f"config is for {cfg.experiment!r}, not {name!r}")


# criterion ------------------------------------------------------------------

def _at_most_two_touched(part_sizes: np.ndarray) -> float:
    """P(a central vertex has neighbours in at most two side parts)."""
    q = 1.0 - np.exp2(-part_sizes.astype(np.float64))
    dist = np.array([1.0, 0.0, 0.0])  # P(touched = 0, 1, 2); mass above 2 is dropped
    for qi in q:
        dist = np.array([dist[0] * (1 - qi), dist[1] * (1 - qi) + dist[0] * qi, dist[2] * (1 - qi) + dist[1] * qi])
    return float(dist.sum())


def _criterion_trial(seed: SampleSeed, n: int) -> dict:
    pg = sample_unipolar(n, seed)
    central = set(pg.central)
    false_neg = false_pos = 0
    for v in range(n):
        says_central = has_independent_triple_in_neighborhood(pg.graph, v)
        if says_central and v not in central:
            false_pos += 1
        elif not says_central and v in central:
            false_neg += 1
    sizes = np.array([len(p) for p in pg.side_parts])
    # a central vertex without an independent triple touches at most two side parts
    predicted = len(central) * _at_most_two_touched(sizes)
    return {"central_size": len(central), "misclassified": false_pos + false_neg,
            "misclassified_outside_central": false_pos, "predicted_misclassified_bound": predicted,
            "r": solve_r(n - len(central)) if n > len(central) else None}


def validate_criterion(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Compare the independent-triple test with true central-clique membership."""
    _require(cfg, "criterion")
    started = time.perf_counter()
    trials = _run_trials(partial(_criterion_trial, n=cfg.n), cfg, workers)
    zero = sum(1 for t in trials if t["misclassified"] == 0)
    metrics = {
        "zero_misclassified": _frequency_metrics(zero, len(trials)),
        "mean_misclassified_fraction": float(np.mean([t["misclassified"] / cfg.n for t in trials])),
        "outside_central_misclassified_total": sum(t["misclassified_outside_central"] for t in trials),
        "predicted_zero_fraction_lower": float(np.mean([max(0.0, 1 - t["predicted_misclassified_bound"])
                                                        for t in trials])),
    }
    return _report(cfg, metrics, trials, started)


# rightsize --------------------------------------------------------------------

def _rightsize_trial(seed: SampleSeed, n: int, targets: tuple[int, ...]) -> dict:
    d = draw_unipolar(n, seed)
    sizes = d.neighborhood_sizes()
    m = len(d.central)
    part_sizes = d.part_sizes()
    counts, predicted_any, predicted_mean = {}, {}, {}
    for lp in targets:
        p = stats.binom.pmf(lp, m, np.exp2(-part_sizes.astype(np.float64)))
        counts[str(lp)] = int(np.sum(sizes == lp))
        predicted_mean[str(lp)] = float(p.sum())
        predicted_any[str(lp)] = float(-np.expm1(np.sum(np.log1p(-np.minimum(p, 1 - 1e-300)))))
    return {"central_size": m, "parts": int(d.part_count), "counts": counts,
            "predicted_count": predicted_mean, "predicted_any": predicted_any,
            "r": solve_r(n - m) if n > m else None}


def validate_rightsize(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Count side parts whose common neighbourhood has each size ``0..ell``."""
    _require(cfg, "rightsize")
    started = time.perf_counter()
    targets = tuple(range(int(cfg.params.get("max_size", ell(cfg.n))) + 1))
    trials = _run_trials(partial(_rightsize_trial, n=cfg.n, targets=targets), cfg, workers)
    metrics = {}
    for lp in targets:
        key = str(lp)
        hit = sum(1 for t in trials if t["counts"][key] >= 1)
        metrics[key] = {
            "at_least_one": _frequency_metrics(hit, len(trials)),
            "median_count": float(np.median([t["counts"][key] for t in trials])),
            "predicted_at_least_one": float(np.mean([t["predicted_any"][key] for t in trials])),
        }
    return _report(cfg, {"sizes": metrics}, trials, started)


# realise --------------------------------------------------------------------

def _pair_edge_codes(d, core: np.ndarray) -> np.ndarray:
    """For every side part ``k``, the edge set of ``H(core, C_k)`` packed into bytes.

    ``core`` holds central positions; edges are indexed by ``combinations(core, 2)``.
    """
    k = d.part_count
    pairs = list(itertools.combinations(range(len(core)), 2))
    if not pairs:
        return np.zeros((k, 0), dtype=np.uint8)
    rows = d.cross_dense(core)
    order, starts = d.part_order()
    rows = rows[:, order]
    bits = np.empty((len(pairs), k), dtype=bool)
    for e, (a, b) in enumerate(pairs):
        bits[e] = np.logical_or.reduceat(rows[a] & rows[b], starts)
    return np.packbits(bits.T, axis=1, bitorder="little")


def _distinct_codes(codes: np.ndarray) -> dict[bytes, int]:
    """Distinct rows mapped to the first part index (0-based) producing them."""
    out: dict[bytes, int] = {}
    for idx, row in enumerate(codes):
        out.setdefault(row.tobytes(), idx)
    return out


def _eligible_pairs(nb: np.ndarray, cap: int) -> list[tuple[int, int]]:
    sizes = nb.sum(axis=1)
    small = np.flatnonzero(sizes <= cap)
    if len(small) < 2:
        return []
    sub = nb[small]
    cols = np.flatnonzero(sub.any(axis=0))
    sub = sub[:, cols].astype(np.float32)
    inter = sub @ sub.T
    union = sizes[small][:, None] + sizes[small][None, :] - np.rint(inter).astype(np.int64)
    ii, jj = np.nonzero(np.triu(union <= cap, k=1))
    return [(int(small[a]), int(small[b])) for a, b in zip(ii, jj)]


def _realise_trial(seed: SampleSeed, n: int, cap: int, max_pairs: int) -> dict:
    d = draw_unipolar(n, seed)
    nb = d.part_neighborhoods()
    pairs = _eligible_pairs(nb, cap)
    rec = {"central_size": len(d.central), "parts": int(d.part_count), "eligible_pairs": len(pairs)}
    if not pairs:
        return {**rec, "eligible": False, "checked_pairs": 0, "realised_pairs": 0, "success": None,
                "predicted_failure_bound": None}
    rng = seed.rng(2)
    if len(pairs) > max_pairs:
        pick = np.sort(rng.choice(len(pairs), size=max_pairs, replace=False))
        pairs = [pairs[p] for p in pick]
    part_sizes = d.part_sizes().astype(np.float64)
    realised = 0
    fail_bound = 0.0
    for i, j in pairs:
        core = np.flatnonzero(nb[i] | nb[j])
        s = len(core)
        n_targets = 2 ** (s * (s - 1) // 2)
        codes = _pair_edge_codes(d, core)
        if len(_distinct_codes(codes)) == n_targets:
            realised += 1
        if s == 2:
            absent = np.exp2(np.log2(0.75) * part_sizes)
            fail_bound += float(np.prod(1 - absent) + np.prod(absent))
        elif s > 2:
            # every target has per-part probability at least 2^(-|C_k| * s)
            fail_bound += n_targets * float(np.prod(1 - np.exp2(-part_sizes * s)))
    return {**rec, "eligible": True, "checked_pairs": len(pairs), "realised_pairs": realised,
            "success": realised == len(pairs), "predicted_failure_bound": min(1.0, fail_bound)}


def validate_realise(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """For sampled pairs with ``|N(C_i) | N(C_j)| <= 2 ell``, check every labelled target on
    that set is ``H(., C_k)`` for some side part ``k``."""
    _require(cfg, "realise")
    started = time.perf_counter()
    cap = int(cfg.params.get("core_cap", 2 * ell(cfg.n)))
    max_pairs = int(cfg.params.get("max_pairs", DEFAULT_MAX_PAIRS))
    trials = _run_trials(partial(_realise_trial, n=cfg.n, cap=cap, max_pairs=max_pairs), cfg, workers)
    eligible = [t for t in trials if t["eligible"]]
    ok = sum(1 for t in eligible if t["success"])
    metrics = {
        "eligible_trials": len(eligible),
        "all_targets_realised": _frequency_metrics(ok, len(eligible)),
        "predicted_success_lower": float(np.mean([1 - t["predicted_failure_bound"] for t in eligible]))
        if eligible else None,
    }
    return _report(cfg, metrics, trials, started)


# dichotomy ------------------------------------------------------------------

def _edges_from_code(code: bytes, s: int) -> list[tuple[int, int]]:
    pairs = list(itertools.combinations(range(s), 2))
    bits = np.unpackbits(np.frombuffer(code, dtype=np.uint8), count=len(pairs), bitorder="little")
    return [pr for pr, b in zip(pairs, bits) if b]


def oracle_psi(d, phi, core_cap: int | None = None, cache: dict | None = None) -> dict:
    """Whether ``H(N(C_i), C_j) |= phi`` for some side parts ``i, j``.

    Parts ``i`` are scanned by increasing ``|N(C_i)|``; with ``core_cap`` only
    those with ``|N(C_i)| <= core_cap`` are tried, which can miss witnesses but
    never invents one.
    """
    cf = compile_formula(phi)
    cache = {} if cache is None else cache
    nb = d.part_neighborhoods()
    sizes = nb.sum(axis=1)
    order = np.argsort(sizes, kind="stable")
    scanned = 0
    for i in order:
        s = int(sizes[i])
        if core_cap is not None and s > core_cap:
            break
        scanned += 1
        core = np.flatnonzero(nb[i])
        for code, j in _distinct_codes(_pair_edge_codes(d, core)).items():
            key = (s, code)
            if key not in cache:
                g = Graph.from_edges(s, _edges_from_code(code, s))
                cache[key] = Evaluator(Structure(g)).holds(cf)
            if cache[key]:
                return {"psi": True, "witness": [int(i) + 1, int(j) + 1], "core_size": s, "scanned_parts": scanned}
    return {"psi": False, "witness": None, "core_size": None, "scanned_parts": scanned}


def _dichotomy_trial(seed: SampleSeed, n: int, phi_text: str, core_cap: int | None) -> dict:
    d = draw_unipolar(n, seed)
    return {"central_size": len(d.central), "parts": int(d.part_count),
            **oracle_psi(d, parse(phi_text), core_cap)}


def dichotomy_experiment(cfg: ExperimentConfig, phi: Formula | None = None, workers: int = 1) -> ExperimentReport:
    """Frequency of the oracle-level ``psi`` for the sentence ``phi``."""
    _require(cfg, "dichotomy")
    started = time.perf_counter()
    if phi is None:
        phi = parse(cfg.params["phi"])
    if free_vars(phi):
        raise ConfigError("phi must be a sentence")
    text = format_formula(phi)
    params = dict(cfg.params)
    params["phi"] = text
    cap = params.get("core_cap", max(2 * ell(cfg.n), DEFAULT_CORE_CAP))
    params["core_cap"] = cap
    cfg = ExperimentConfig(cfg.experiment, cfg.n, cfg.trials, cfg.seed, params)
    trials = _run_trials(partial(_dichotomy_trial, n=cfg.n, phi_text=text,
                                 core_cap=None if cap is None else int(cap)), cfg, workers)
    k = sum(1 for t in trials if t["psi"])
    return _report(cfg, {"psi": _frequency_metrics(k, len(trials))}, trials, started)


# frequency ------------------------------------------------------------------

Target = Formula | Callable[[PerfectSample], bool]


def _frequency_trial(seed: SampleSeed, n: int, phi_text: str | None, oracle, on_complement: bool) -> dict:
    ps = sample_perfect(n, seed)
    g = complement(ps.graph) if on_complement else ps.graph
    if phi_text is not None:
        value = Evaluator(Structure(g)).holds(compile_formula(parse(phi_text)))
    else:
        value = bool(oracle(PerfectSample(g, ps.orientation, ps.witness)))
    return {"orientation": ps.orientation.value, "value": value}


def run_frequency(cfg: ExperimentConfig, target: Target, on_complement: bool = False,
                  workers: int = 1) -> ExperimentReport:
    """How often a sentence (or an oracle predicate) holds on random perfect graphs.

    With ``on_complement`` each sample is complemented before evaluation.
    Sentences are evaluated directly and need ``n <= FULL_FO_MAX_N``.
    """
    _require(cfg, "frequency")
    started = time.perf_counter()
    params = dict(cfg.params)
    params["on_complement"] = on_complement
    if isinstance(target, Formula):
        if free_vars(target):
            raise ConfigError("frequency target must be a sentence")
        if cfg.n > FULL_FO_MAX_N:
            raise CostGuardError(f"first-order evaluation is limited to n <= {FULL_FO_MAX_N}; use an oracle")
        phi_text, oracle = format_formula(target), None
        params["phi"] = phi_text
    else:
        phi_text, oracle = None, target
        params["oracle"] = getattr(target, "__name__", type(target).__name__)
    cfg = ExperimentConfig(cfg.experiment, cfg.n, cfg.trials, cfg.seed, params)
    trials = _run_trials(partial(_frequency_trial, n=cfg.n, phi_text=phi_text, oracle=oracle,
                                 on_complement=on_complement), cfg, workers)
    k = sum(1 for t in trials if t["value"])
    return _report(cfg, {"value": _frequency_metrics(k, len(trials))}, trials, started)


def _theorem1_trial(seed: SampleSeed, n: int, sentence_text: str) -> dict:
    pg = sample_unipolar(n, seed)
    value = Evaluator(oracle_structure(pg)).holds(compile_formula(parse(sentence_text)))
    return {"central_size": len(pg.central), "value": value}


def theorem1_experiment(cfg: ExperimentConfig, phi0: Formula | None = None, phi1: Formula | None = None,
                        workers: int = 1) -> ExperimentReport:
    """Frequency of the composed sentence, with helper predicates read off the true partition."""
    _require(cfg, "theorem1")
    if cfg.n > FULL_FO_MAX_N:
        raise CostGuardError(f"first-order evaluation is limited to n <= {FULL_FO_MAX_N}")
    started = time.perf_counter()
    phi0 = phi0 if phi0 is not None else (parse(cfg.params["phi0"]) if "phi0" in cfg.params
                                         else load_default_sentence("phi0"))
    phi1 = phi1 if phi1 is not None else (parse(cfg.params["phi1"]) if "phi1" in cfg.params
                                         else load_default_sentence("phi1"))
    params = {**cfg.params, "phi0": format_formula(phi0), "phi1": format_formula(phi1)}
    cfg = ExperimentConfig(cfg.experiment, cfg.n, cfg.trials, cfg.seed, params)
    sentence = format_formula(build_theorem1(phi0, phi1, interpreted=True))
    trials = _run_trials(partial(_theorem1_trial, n=cfg.n, sentence_text=sentence), cfg, workers)
    k = sum(1 for t in trials if t["value"])
    return _report(cfg, {"value": _frequency_metrics(k, len(trials))}, trials, started)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Dispatch on ``cfg.experiment``; sentences come from ``cfg.params``."""
    if cfg.experiment == "criterion":
        return validate_criterion(cfg, workers)
    if cfg.experiment == "rightsize":
        return validate_rightsize(cfg, workers)
    if cfg.experiment == "realise":
        return validate_realise(cfg, workers)
    if cfg.experiment == "dichotomy":
        if "phi" not in cfg.params:
            raise ConfigError("the dichotomy experiment needs a sentence (phi)")
        return dichotomy_experiment(cfg, workers=workers)
    if cfg.experiment == "frequency":
        if "phi" not in cfg.params:
            raise ConfigError("the frequency experiment needs a sentence (phi)")
        return run_frequency(cfg, parse(cfg.params["phi"]), bool(cfg.params.get("on_complement", False)),
                             workers)
    return theorem1_experiment(cfg, workers=workers)


def compare_reports(a: ExperimentReport, b: ExperimentReport) -> bool:
    """Equality of two reports ignoring wall-clock time."""
    return a.to_json(include_wall_clock=False) == b.to_json(include_wall_clock=False)


def summarize(reports: Sequence[ExperimentReport]) -> list[dict]:
    return [{"experiment": r.experiment, "n": r.config["n"], **_flatten(r.metrics)} for r in reports]


def _flatten(obj, prefix: str = "") -> dict:
    out = {}
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out
