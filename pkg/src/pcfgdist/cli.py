"""Command-line entry point: ``pcfgdist <command> ...``.

Each command prints one JSON document on stdout (or ``key: value`` lines
with ``--format text``) and a short human summary on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import consensus as consensus_mod
from . import distance as dist
from . import inside, pcp
from .errors import (BudgetExhaustedError, GrammarSyntaxError, ImproperGrammarError,
                     InconsistentGrammarError, NotConvergedError, UncertifiableMetricError)
from .grammar import format_string, parse_grammar, serialize, validate_proper

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 3
EXIT_BUDGET = 4
EXIT_UNCERTIFIABLE = 5

METRIC_ALIASES = {
    "l1": "l1", "l2": "l2", "linf": "linf", "variation": "variation",
    "hellinger": "hellinger", "js": "jensen_shannon", "jensen_shannon": "jensen_shannon",
    "chi2": "chi_squared", "chi_squared": "chi_squared", "kl": "kullback_leibler",
    "kullback_leibler": "kullback_leibler", "coemission": "coemission",
}


class _Exit(Exception):
    def __init__(self, code, record=None, message=""):
        self.code = code
        self.record = record
        self.message = message


def number(value, certified):
    return {"value": value, "certified": bool(certified)}


def interval_record(r: dist.DistanceResult) -> dict:
    out = {
        "metric": r.metric.value,
        "lo": r.interval.lo,
        "hi": r.interval.hi,
        "width": r.interval.width,
        "estimate": r.estimate,
        "certified": r.certified,
        "truncation_length": r.truncation_length,
        "divergence_detected": r.divergence_detected,
    }
    if r.witness is not None:
        out["witness"] = format_string(r.witness)
    return out


def _load_grammar(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _Exit(EXIT_ERROR, message=f"{path}: {e.strerror}")
    try:
        return parse_grammar(text)
    except GrammarSyntaxError as e:
        raise _Exit(EXIT_PARSE, message=f"{path}: {e}")


# ---------------------------------------------------------------------------
# commands


def cmd_check(args):
    g = _load_grammar(args.grammar)
    report = validate_proper(g)
    pv = inside.partition_function(g, args.tol * 1e-2)
    consistent = pv.converged and abs(pv[g.start] - 1.0) <= args.tol
    results = {
        "proper": report.is_proper,
        "cycle_free": report.cycle_free,
        "cycle": list(report.cycle) if report.cycle else None,
        "epsilon_ok": report.epsilon_ok,
        "epsilon_violation": str(report.epsilon_violation) if report.epsilon_violation else None,
        "useless_symbols": sorted(report.useless_symbols),
        "partition_function": {a: number(v, pv.converged) for a, v in sorted(pv.values.items())},
        "partition_converged": pv.converged,
        "iterations": pv.iterations,
        "consistent": number(consistent, pv.converged),
    }
    summary = (f"proper={report.is_proper} Z[{g.start}]={pv[g.start]:.12g} "
               f"consistent={consistent}")
    return {"grammar": args.grammar, "tol": args.tol}, results, summary


def _consensus_record(r: consensus_mod.ConsensusResult):
    return {
        "witness": format_string(r.witness),
        "probability": number(r.probability, r.certified),
        "certified_at_length": r.certified_at_length,
        "strings_examined": r.strings_examined,
        "remaining": r.remaining,
        "certified": r.certified,
    }


def cmd_consensus(args):
    g = _load_grammar(args.grammar)
    inputs = {"grammar": args.grammar, "max_length": args.max_length, "mode": args.mode}
    try:
        r = consensus_mod.consensus_string(g, args.max_length, mode=args.mode)
    except BudgetExhaustedError as e:
        raise _Exit(EXIT_BUDGET, (inputs, _consensus_record(e.result)), str(e))
    return inputs, _consensus_record(r), f"consensus {format_string(r.witness)!r} p={r.probability:.12g}"


def cmd_distance(args):
    g1, g2 = _load_grammar(args.grammar1), _load_grammar(args.grammar2)
    metric = dist.Metric(METRIC_ALIASES[args.metric])
    inputs = {"grammar1": args.grammar1, "grammar2": args.grammar2, "metric": metric.value,
              "eps": args.eps, "max_length": args.max_length}
    if not metric.certifiable:
        r = dist.truncated_metric(g1, g2, metric, args.max_length)
        rec = interval_record(r)
        if r.divergence_detected:
            return inputs, rec, f"{metric.value} diverges (witness {rec['witness']!r})"
        raise _Exit(EXIT_UNCERTIFIABLE, (inputs, rec),
                    f"{metric.value} cannot be certified; truncated value {r.interval.lo:.12g}")
    try:
        r = dist.distance_interval(g1, g2, metric, args.eps, args.max_length)
    except BudgetExhaustedError as e:
        raise _Exit(EXIT_BUDGET, (inputs, interval_record(e.result)), str(e))
    return inputs, interval_record(r), (
        f"{metric.value} in [{r.interval.lo:.12g}, {r.interval.hi:.12g}]")


def cmd_equivalence(args):
    g1, g2 = _load_grammar(args.grammar1), _load_grammar(args.grammar2)
    inputs = {"grammar1": args.grammar1, "grammar2": args.grammar2, "max_length": args.max_length}
    r = dist.equivalence_test(g1, g2, args.max_length)
    if isinstance(r, dist.Distinct):
        results = {"verdict": "distinct", "witness": format_string(r.witness),
                   "p1": number(r.p1, True), "p2": number(r.p2, True)}
        summary = f"distinct at {format_string(r.witness)!r}"
    else:
        results = {"verdict": "indistinguishable", "up_to": r.up_to}
        summary = f"no difference up to length {r.up_to}"
    return inputs, results, summary


def cmd_ambiguity(args):
    g = _load_grammar(args.grammar)
    inputs = {"grammar": args.grammar, "max_length": args.max_length}
    r = dist.ambiguity_certificate(g, args.max_length)
    if isinstance(r, dist.Ambiguous):
        results = {"verdict": "ambiguous", "detector": r.detector, "length": r.length,
                   "witness": format_string(r.witness) if r.witness is not None else None}
        summary = f"ambiguous ({r.detector}) at length {r.length}"
    else:
        results = {"verdict": "unknown", "budget": r.budget}
        summary = f"no ambiguity found up to length {r.budget}"
    return inputs, results, summary


def cmd_tac(args):
    g = _load_grammar(args.grammar)
    value = inside.tree_auto_coemission(g, args.tol)
    return ({"grammar": args.grammar, "tol": args.tol},
            {"tree_auto_coemission": number(value, True)},
            f"TAC = {value:.12g}")


def cmd_pcp(args):
    try:
        instance = pcp.PcpInstance.parse(Path(args.instance).read_text(encoding="utf-8"))
    except OSError as e:
        raise _Exit(EXIT_ERROR, message=f"{args.instance}: {e.strerror}")
    except ValueError as e:
        raise _Exit(EXIT_PARSE, message=f"{args.instance}: {e}")
    inputs = {"instance": args.instance, "n": instance.n, "encode": args.encode,
              "solve_budget": args.solve_budget, "tac": args.tac}
    results = {}
    notes = []
    if args.encode:
        g1, g2 = pcp.construct_pair(instance)
        g = {"g1": g1, "g2": g2, "g0": pcp.construct_g0(instance)}[args.encode]
        text = serialize(g)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            results["grammar_file"] = args.output
        results["grammar"] = text
        notes.append(f"encoded {args.encode}")
    if args.solve_budget is not None:
        sol = pcp.solve_pcp_bounded(instance, args.solve_budget)
        results["solution"] = list(sol) if sol else None
        notes.append(f"solution {sol}" if sol else f"no solution up to {args.solve_budget} steps")
    if args.tac:
        engine = inside.tree_auto_coemission(pcp.construct_g0(instance))
        closed = pcp.tac_closed_form(instance.n)
        results["tac_closed_form"] = number(closed, True)
        results["tac_engine"] = number(engine, True)
        notes.append(f"TAC closed form {closed:.12g}, engine {engine:.12g}")
    return inputs, results, "; ".join(notes) or "nothing requested"


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcfgdist",
                                     description="Probabilities, consensus strings and "
                                                 "certified distances for PCFGs.")
    parser.add_argument("--format", choices=["json", "text"], default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=["json", "text"], default=argparse.SUPPRESS)
        p.set_defaults(func=fn)
        return p

    p = add("check", cmd_check, "properness, partition function and consistency")
    p.add_argument("grammar")
    p.add_argument("--tol", type=float, default=inside.DEFAULT_TOL)

    p = add("consensus", cmd_consensus, "most probable string")
    p.add_argument("grammar")
    p.add_argument("--max-length", type=int, default=consensus_mod.DEFAULT_MAX_LENGTH)
    p.add_argument("--mode", choices=["fast", "reference"], default="fast")

    p = add("distance", cmd_distance, "certified distance interval")
    p.add_argument("grammar1")
    p.add_argument("grammar2")
    p.add_argument("--metric", choices=sorted(METRIC_ALIASES), default="l1")
    p.add_argument("--eps", type=float, default=dist.DEFAULT_EPS)
    p.add_argument("--max-length", type=int, default=dist.DEFAULT_MAX_LENGTH)

    p = add("equivalence", cmd_equivalence, "search for a string separating two grammars")
    p.add_argument("grammar1")
    p.add_argument("grammar2")
    p.add_argument("--max-length", type=int, default=dist.DEFAULT_MAX_LENGTH)

    p = add("ambiguity", cmd_ambiguity, "search for a proof of ambiguity")
    p.add_argument("grammar")
    p.add_argument("--max-length", type=int, default=dist.DEFAULT_MAX_LENGTH)

    p = add("tac", cmd_tac, "tree-auto-coemission")
    p.add_argument("grammar")
    p.add_argument("--tol", type=float, default=inside.DEFAULT_TOL)

    p = add("pcp", cmd_pcp, "encode / solve a PCP instance")
    p.add_argument("instance")
    p.add_argument("--encode", choices=["g1", "g2", "g0"])
    p.add_argument("--output", help="write the encoded grammar here")
    p.add_argument("--solve-budget", type=int)
    p.add_argument("--tac", action="store_true")
    return parser


def _emit(fmt, command, inputs, results, out):
    record = {"command": command, "inputs": inputs, "results": results}
    if fmt == "json":
        json.dump(record, out, indent=2)
        out.write("\n")
    else:
        def flat(prefix, value):
            if isinstance(value, dict):
                for k, v in value.items():
                    yield from flat(f"{prefix}.{k}" if prefix else k, v)
            else:
                yield prefix, value
        for k, v in flat("", results):
            if isinstance(v, str) and "\n" in v:
                v = "\n  " + v.rstrip("\n").replace("\n", "\n  ")
            out.write(f"{k}: {v}\n")
    return record


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        inputs, results, summary = args.func(args)
        code = EXIT_OK
    except _Exit as e:
        if e.record is None:
            stderr.write(f"error: {e.message}\n")
            return e.code
        inputs, results = e.record
        summary, code = e.message, e.code
    except (ImproperGrammarError, InconsistentGrammarError, NotConvergedError,
            UncertifiableMetricError, ValueError) as e:
        stderr.write(f"error: {e}\n")
        return EXIT_ERROR
    _emit(args.format, args.command, inputs, results, stdout)
    stderr.write(summary + "\n")
    return code


def load_record(text: str) -> dict:
    """Parse a JSON output document (accepts ``Infinity`` for unbounded ends)."""
    return json.loads(text, parse_constant=lambda c: math.inf if c == "Infinity" else
                      -math.inf if c == "-Infinity" else math.nan)


if __name__ == "__main__":
    sys.exit(main())
