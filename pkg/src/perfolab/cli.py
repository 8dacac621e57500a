"""Command-line entry point: ``perfolab <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import experiments as ex
from .combinatorics import central_size_pmf
from .errors import ConfigError, PerfolabError
from .formulas import (
    PaperFormulaKind,
    build_base_formula,
    build_psi,
    build_theorem1,
    build_unip,
    load_default_sentence,
    read_sentence,
    relativize,
    spectrum_contains,
)
from .graph import Graph
from .logic import Structure, evaluate, format_formula, free_vars, parse
from .sampler import SampleSeed, max_n, sample_perfect, sample_unipolar

FORMULA_KINDS = [k.value for k in PaperFormulaKind] + ["unip", "relativize", "psi", "theorem1"]


def _sentence_arg(text_or_path: str):
    if text_or_path == "-":
        return parse(sys.stdin.read())
    if os.path.isfile(text_or_path):
        return read_sentence(text_or_path)
    return parse(text_or_path)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _check_n(n: int) -> None:
    if n < 1:
        raise ConfigError("n must be at least 1")
    if n > max_n():
        raise ConfigError(f"n={n} exceeds the limit {max_n()} (set PERFOLAB_MAX_N to raise it)")


def cmd_sample(args) -> int:
    _check_n(args.n)
    seed = SampleSeed(args.seed, args.stream)
    if args.unipolar:
        obj = sample_unipolar(args.n, seed).to_json()
    else:
        obj = sample_perfect(args.n, seed).to_json()
    _emit(json.dumps(obj), args.out)
    return 0


def cmd_eval(args) -> int:
    with open(args.graph) as fh:
        graph = Graph.from_json(json.load(fh))
    phi = _sentence_arg(args.sentence)
    env = {}
    for item in args.env or []:
        name, _, value = item.partition("=")
        env[name] = int(value)
    if free_vars(phi) - env.keys():
        raise ConfigError(f"unbound free variables: {sorted(free_vars(phi) - env.keys())}")
    print("true" if evaluate(Structure(graph), phi, env) else "false")
    return 0


def _sentence_or_default(path: str | None, name: str):
    return read_sentence(path) if path else load_default_sentence(name)


def cmd_formulas(args) -> int:
    interpreted = args.interpreted
    kind = args.kind
    if kind == "unip":
        f = build_unip()
    elif kind == "relativize":
        f = relativize(_sentence_or_default(args.phi, "phi1"), interpreted)
    elif kind == "psi":
        f = build_psi(_sentence_or_default(args.phi, "phi1"), interpreted)
    elif kind == "theorem1":
        f = build_theorem1(_sentence_or_default(args.phi0, "phi0"), _sentence_or_default(args.phi1, "phi1"),
                           interpreted)
    else:
        f = build_base_formula(PaperFormulaKind(kind), interpreted)
    _emit(format_formula(f), args.out)
    return 0


def cmd_spectrum(args) -> int:
    phi = _sentence_arg(args.sentence)
    print("true" if spectrum_contains(phi, args.n, args.cap) else "false")
    return 0


def cmd_experiment(args) -> int:
    params = {}
    if args.phi:
        params["phi"] = format_formula(read_sentence(args.phi))
    if args.phi0:
        params["phi0"] = format_formula(read_sentence(args.phi0))
    if args.phi1:
        params["phi1"] = format_formula(read_sentence(args.phi1))
    if args.core_cap is not None:
        params["core_cap"] = args.core_cap
    if args.max_pairs is not None:
        params["max_pairs"] = args.max_pairs
    if args.on_complement:
        params["on_complement"] = True
    if args.name == "dichotomy" and "phi" not in params:
        params["phi"] = format_formula(load_default_sentence("phi1"))
    cfg = ex.ExperimentConfig(args.name, args.n, args.trials, args.seed, params)
    report = ex.run_experiment(cfg, workers=args.workers)
    _emit(report.to_json(), args.out)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    return 0


def cmd_report(args) -> int:
    with open(args.report) as fh:
        report = ex.ExperimentReport.from_json(fh.read())
    text = report.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_pmf(args) -> int:
    _check_n(args.n)
    pmf = central_size_pmf(args.n)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["m", "probability"])
    for m, p in enumerate(pmf, start=1):
        if p > 0 or args.all:
            writer.writerow([m, repr(float(p))])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perfolab", description="Random perfect graphs and first-order sentences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a random perfect (or unipolar) graph as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--unipolar", action="store_true", help="skip the complementing coin")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="evaluate a sentence on a graph file")
    p.add_argument("graph", help="JSON file with n and edges")
    p.add_argument("sentence", nargs="?", default="-", help="formula text, a file, or - for stdin")
    p.add_argument("--env", action="append", metavar="VAR=VERTEX")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("formulas", help="print a constructed formula in canonical syntax")
    p.add_argument("kind", choices=FORMULA_KINDS)
    p.add_argument("--interpreted", action="store_true", help="keep InC0/CN/Hedge as relation atoms")
    p.add_argument("--phi")
    p.add_argument("--phi0")
    p.add_argument("--phi1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_formulas)

    p = sub.add_parser("spectrum", help="is there a model on exactly n vertices?")
    p.add_argument("sentence")
    p.add_argument("n", type=int)
    p.add_argument("--cap", type=int, default=6)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("experiment", help="run a seeded experiment and print its JSON report")
    p.add_argument("name", choices=ex.EXPERIMENTS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phi")
    p.add_argument("--phi0")
    p.add_argument("--phi1")
    p.add_argument("--core-cap", type=int)
    p.add_argument("--max-pairs", type=int)
    p.add_argument("--on-complement", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--csv", help="also write per-trial rows to this CSV file")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="convert a JSON report to CSV")
    p.add_argument("report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pmf", help="central clique size distribution as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--all", action="store_true", help="include zero-probability rows")
    p.set_defaults(func=cmd_pmf)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PerfolabError, OSError) as exc:
        print(f"perfolab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
