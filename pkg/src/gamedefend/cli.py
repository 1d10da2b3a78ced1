"""Command-line front end.  Every command prints one JSON report on stdout.

Exit status does not depend on verdicts: 0 when the analysis ran, 2 for
usage errors, 3 for malformed input and 4 when a resource limit is hit.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
import warnings
from pathlib import Path

from . import devgraph
from .asw import asw_source
from .defend import (DEFAULT_BUDGET, Verdict, characterization_verdict, defendable_mixed_NE,
                     defendable_mixed_OptNE, defendable_oracle, experimental_verdict,
                     mixed_counterexample, product_decomposition, security_level, violation)
from .errors import BudgetExceeded, GameError
from .game import (GameFrame, UtilityProfile, dumps_game, frame_from_dict, is_nontrivial)
from .protocol import objectives_of, parse_protocol, to_frame
from .solution import (SolutionConcept, is_mixed_equilibrium, mixed_nash_2p, solve)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_LIMIT = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class _Report:
    def __init__(self, argv):
        self.doc = {"command": list(argv), "inputs": {}, "warnings": [], "divergences": []}
        self.started = time.perf_counter()

    def read(self, path) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise GameError(f"cannot read {path}: {exc.strerror}") from None
        self.doc["inputs"][str(path)] = "sha256:" + hashlib.sha256(data).hexdigest()
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError:
            raise GameError(f"{path} is not UTF-8") from None

    def warn(self, text: str):
        if text not in self.doc["warnings"]:
            self.doc["warnings"].append(text)

    def dump(self) -> str:
        self.doc["timing_s"] = round(time.perf_counter() - self.started, 4)
        return json.dumps(self.doc, indent=2, sort_keys=True, ensure_ascii=False)


def _load_game(report: _Report, path):
    text = report.read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise GameError(f"{path}: game document must be a JSON object")
    return frame_from_dict(doc)


def _load_utilities(report: _Report, frame: GameFrame, spec: str | None, embedded):
    if spec is None:
        if embedded is None:
            raise GameError("no utilities: pass --utilities or embed them in the game file")
        return embedded
    text = spec if spec.lstrip().startswith(("{", "[")) else report.read(spec)
    try:
        table = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameError(f"utilities are not valid JSON ({exc})") from None
    doc = {"agents": list(frame.agents), "strategies": [list(s) for s in frame.strategies],
           "outcomes": list(frame.outcomes),
           "outcome_map": [frame.outcomes[k] for k in frame.outcome_map],
           "utilities": table}
    return frame_from_dict(doc)[1]


def _objective(frame: GameFrame, named: dict, text: str | None):
    if text is None:
        raise GameError("--objective is required")
    if text in named:
        return frame.objective(named[text])
    names = [x.strip() for x in text.split(",") if x.strip()]
    return frame.objective(names)


def _defenders(frame: GameFrame, text: str | None):
    if text is None or text.strip() in ("", "all", "*"):
        return frame.all_agents
    if text.strip() in ("none", "{}"):
        return frozenset()
    return frame.agent_set(x.strip() for x in text.split(",") if x.strip())


def _names(frame: GameFrame, agents) -> list[str]:
    return [frame.agents[i] for i in sorted(agents)]


def _outcomes(frame: GameFrame, outs) -> list[str]:
    return [frame.outcomes[o] for o in sorted(outs)]


def _profiles(frame: GameFrame, sols) -> list[dict]:
    return [{"profile": list(frame.profile_names(s)), "outcome": frame.outcome_name(s)}
            for s in sorted(sols)]


# commands

def cmd_solve(args, report: _Report):
    frame, embedded, _ = _load_game(report, args.game)
    u = _load_utilities(report, frame, args.utilities, embedded)
    sc = SolutionConcept.parse(args.sc)
    sols = solve(sc, frame, u)
    result = {"sc": sc.value, "solutions": _profiles(frame, sols),
              "outcomes": _outcomes(frame, {frame.outcome_map[frame.flat_index(s)] for s in sols})}
    if args.mixed:
        result["mixed"] = _mixed_solutions(frame, u)
    report.doc["result"] = result


def _mixed_solutions(frame: GameFrame, u: UtilityProfile) -> dict:
    res = mixed_nash_2p(frame, u)
    return {
        "equilibria": [e.as_strings() for e in res.equilibria],
        "degenerate": res.degenerate,
        "verified": all(is_mixed_equilibrium(frame, u, e) for e in res.equilibria),
    }


def cmd_check(args, report: _Report):
    frame, embedded, named = _load_game(report, args.game)
    u = _load_utilities(report, frame, args.utilities, embedded)
    gamma = _objective(frame, named, args.objective)
    sc = SolutionConcept.parse(args.sc)
    w = violation(frame, u, sc, gamma)
    report.doc["result"] = {
        "sc": sc.value, "objective": _outcomes(frame, gamma), "correct": w is None,
        "witness": None if w is None else w.to_dict(frame),
    }


def cmd_defend(args, report: _Report):
    frame, _, named = _load_game(report, args.game)
    gamma = _objective(frame, named, args.objective)
    defenders = _defenders(frame, args.defenders)
    sc = SolutionConcept.parse(args.sc)
    method = args.method
    grand = defenders == frame.all_agents
    has_char = sc in (SolutionConcept.NE, SolutionConcept.OPTNE, SolutionConcept.PO)
    if method == "auto":
        method = "both" if grand and has_char else "oracle"
    result = {"sc": sc.value, "objective": _outcomes(frame, gamma),
              "defenders": _names(frame, defenders), "method": method,
              "injective": frame.is_injective, "verdicts": {}}
    oracle = char = None
    if method in ("oracle", "both"):
        oracle = defendable_oracle(frame, gamma, defenders, sc, budget=args.budget,
                                   workers=args.workers)
        result["verdicts"]["oracle"] = oracle.to_dict(frame)
    if method in ("char", "both", "experimental"):
        if not grand:
            raise GameError("graph characterizations only cover defence by all agents")
        if sc is not SolutionConcept.PO and not is_nontrivial(frame, gamma):
            report.warn("objective is trivial; characterizations skipped")
        elif method == "experimental":
            result["verdicts"]["experimental"] = experimental_verdict(frame, gamma, sc).to_dict(frame)
        else:
            char = characterization_verdict(frame, gamma, sc)
            result["verdicts"]["characterization"] = char.to_dict(frame)
            if not frame.is_injective and sc is not SolutionConcept.PO:
                report.warn("characterization on a non-injective frame is outcome-level "
                            "and may disagree with the oracle")
    if oracle is not None and char is not None and oracle.holds != char.holds:
        report.doc["divergences"].append({
            "between": ["oracle", "characterization"],
            "oracle": oracle.holds, "characterization": char.holds,
            "note": "the oracle is exact; the characterization verdict is not used",
        })
        report.warn("oracle and characterization diverge; reporting the oracle verdict")
    primary = oracle or char
    if primary is None and "experimental" in result["verdicts"]:
        result["holds"] = result["verdicts"]["experimental"]["holds"]
    else:
        result["holds"] = None if primary is None else primary.holds
    if args.mixed:
        result["mixed"] = _mixed_defence(frame, gamma, defenders, sc, args, report)
    report.doc["result"] = result


def _mixed_defence(frame, gamma, defenders, sc, args, report) -> dict:
    if sc not in (SolutionConcept.NE, SolutionConcept.OPTNE):
        raise GameError("mixed defendability is available for ne and optne")
    if defenders != frame.all_agents:
        raise GameError("mixed defendability is analysed for defence by all agents")
    if sc is SolutionConcept.NE:
        structural = defendable_mixed_NE(frame, gamma)
        rule = "only the full outcome set"
    else:
        structural = defendable_mixed_OptNE(frame, gamma)
        rule = "product of strategy sets"
    doc = {"structural": structural, "rule": rule}
    decomp = product_decomposition(frame, gamma)
    doc["product_factors"] = None if decomp is None else decomp.to_names(frame)
    if frame.n_agents == 2 and args.samples > 0:
        found = mixed_counterexample(frame, gamma, sc, samples=args.samples,
                                     rng=random.Random(args.seed))
        doc["search"] = {"samples": args.samples, "seed": args.seed}
        if found is None:
            doc["search"]["counterexample"] = None
            if not structural:
                report.doc["divergences"].append({
                    "between": ["mixed structural rule", "mixed search"],
                    "structural": structural, "search": "no counterexample",
                    "note": "bounded search; absence of a counterexample is not a proof",
                })
        else:
            doc["search"]["counterexample"] = {
                "utilities": found.utilities.to_table(frame),
                "equilibrium": found.equilibrium.as_strings(),
                "source": found.source, "samples_used": found.samples_used,
                "verified": is_mixed_equilibrium(frame, found.utilities, found.equilibrium),
            }
            if structural:
                report.doc["divergences"].append({
                    "between": ["mixed structural rule", "mixed search"],
                    "structural": structural, "search": "counterexample found",
                })
    elif frame.n_agents != 2:
        report.warn("mixed counterexample search needs exactly 2 agents")
    return doc


def cmd_level(args, report: _Report):
    frame, _, named = _load_game(report, args.game)
    gamma = _objective(frame, named, args.objective)
    sc = SolutionConcept.parse(args.sc)
    record: dict = {}
    level = security_level(frame, gamma, sc, record=record, budget=args.budget,
                           workers=args.workers)
    report.doc["result"] = {
        "sc": sc.value, "objective": _outcomes(frame, gamma),
        "security_level": [_names(frame, d) for d in level],
        "tested": [{"defenders": _names(frame, d), "holds": v.holds}
                   for d, v in sorted(record.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))],
    }
    if args.figure:
        from .plotting import lattice_figure, save
        title = f"{sc.value}: " + "{" + ", ".join(_outcomes(frame, gamma)) + "}"
        save(lattice_figure(frame, record, level, title), args.figure)
        report.doc["result"]["figure"] = str(args.figure)


def cmd_graph(args, report: _Report):
    frame, _, named = _load_game(report, args.game)
    gamma = _objective(frame, named, args.objective) if args.objective else frozenset()
    g = devgraph.build(frame)
    result = {
        "vertices": list(frame.outcomes),
        "edges": [[frame.outcomes[a], frame.outcomes[b]] for a, b in g.edges],
        "self_loops": _outcomes(frame, g.self_loops),
        "lines": sorted(_outcomes(frame, line) for line in g.lines),
    }
    if gamma:
        sub = devgraph.restrict(g, gamma)
        result["objective"] = _outcomes(frame, gamma)
        result["neighborhood"] = _outcomes(frame, devgraph.neighborhood(g, gamma))
        result["components"] = sorted(_outcomes(frame, vs) for vs, _ in
                                      devgraph.components(sub.vertices, sub.edges))
        result["knot_free_components"] = sorted(
            _outcomes(frame, vs) for vs in devgraph.knot_free_components(sub.vertices, sub.lines))
    if args.dot:
        Path(args.dot).write_text(devgraph.to_dot(g, frame, gamma), encoding="utf-8")
        result["dot"] = str(args.dot)
    if args.figure:
        from .plotting import deviation_figure, save
        save(deviation_figure(g, frame, gamma, "deviation graph"), args.figure)
        result["figure"] = str(args.figure)
    report.doc["result"] = result


def cmd_compile(args, report: _Report):
    tree = parse_protocol(report.read(args.protocol))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        frame = to_frame(tree)
        objectives = objectives_of(tree, frame)
    for w in caught:
        report.warn(str(w.message))
    text = dumps_game(frame, objectives=objectives)
    result = {"agents": list(frame.agents), "shape": list(frame.shape),
              "outcomes": list(frame.outcomes), "injective": frame.is_injective}
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        result["out"] = str(args.out)
    else:
        result["game"] = json.loads(text)
    report.doc["result"] = result


def cmd_asw(args, report: _Report):
    source = asw_source(reliable_ttp=not args.unreliable_ttp)
    result = {"reliable_ttp": not args.unreliable_ttp}
    if args.out:
        Path(args.out).write_text(source, encoding="utf-8")
        result["out"] = str(args.out)
    else:
        result["protocol"] = source
    report.doc["result"] = result


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gamedefend", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def game_cmd(name, help_text):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("--game", required=True, help="game file (JSON)")
        return q

    def oracle_opts(q):
        q.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                       help="max utility profiles x strategy profiles for the oracle")
        q.add_argument("--workers", type=int, default=1, help="oracle worker processes")

    sc_choices = [c.value for c in SolutionConcept]
    q = game_cmd("solve", "list solutions for given utilities")
    q.add_argument("--sc", default="ne", choices=sc_choices)
    q.add_argument("--utilities", help="JSON file or inline JSON, agent -> outcome -> value")
    q.add_argument("--mixed", action="store_true", help="also list exact mixed NE (2 agents)")
    q.set_defaults(func=cmd_solve)

    q = game_cmd("check", "correctness of an objective for given utilities")
    q.add_argument("--sc", default="ne", choices=sc_choices)
    q.add_argument("--utilities")
    q.add_argument("--objective", required=True, help="comma-separated outcomes or a named objective")
    q.set_defaults(func=cmd_check)

    q = game_cmd("defend", "defendability of an objective")
    q.add_argument("--objective", required=True)
    q.add_argument("--defenders", help="comma-separated agents (default: all)")
    q.add_argument("--sc", default="ne", choices=sc_choices)
    q.add_argument("--method", default="auto",
                   choices=["auto", "oracle", "char", "both", "experimental"])
    q.add_argument("--mixed", action="store_true", help="add the mixed-strategy analysis")
    q.add_argument("--samples", type=int, default=1000, help="mixed counterexample samples")
    q.add_argument("--seed", type=int, default=0)
    oracle_opts(q)
    q.set_defaults(func=cmd_defend)

    q = game_cmd("level", "security level: minimal defending coalitions")
    q.add_argument("--objective", required=True)
    q.add_argument("--sc", default="ne", choices=sc_choices)
    q.add_argument("--figure", help="write a PNG of the defender-set lattice")
    oracle_opts(q)
    q.set_defaults(func=cmd_level)

    q = game_cmd("graph", "deviation graph")
    q.add_argument("--objective", help="outcomes to highlight and analyse")
    q.add_argument("--dot", help="write DOT text here")
    q.add_argument("--figure", help="write a PNG drawing here")
    q.set_defaults(func=cmd_graph)

    q = sub.add_parser("compile", help="protocol source to game file")
    q.add_argument("protocol")
    q.add_argument("--out", help="game file to write (default: inline in the report)")
    q.set_defaults(func=cmd_compile)

    q = sub.add_parser("asw", help="emit the ASW contract-signing protocol source")
    q.add_argument("--unreliable-ttp", action="store_true")
    q.add_argument("--out")
    q.set_defaults(func=cmd_asw)
    return p


def run_command(argv, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    report = _Report(argv)
    status = EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args.func(args, report)
        except BudgetExceeded as exc:
            report.doc["error"] = {"kind": "resource-limit", "message": str(exc)}
            status = EXIT_LIMIT
        except (GameError, OSError) as exc:
            report.doc["error"] = {"kind": "input", "message": str(exc)}
            status = EXIT_INPUT
    for w in caught:
        report.warn(str(w.message))
    print(report.dump(), file=out)
    if status != EXIT_OK:
        print(f"gamedefend: {report.doc['error']['message']}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
