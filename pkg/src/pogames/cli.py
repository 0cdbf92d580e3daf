"""Command-line entry point.

Every subcommand prints a JSON report (schema ``REPORT_SCHEMA``) and exits
with 0 for YES/success, 1 for NO, 2 for an incomplete answer or an exhausted
budget, 3 for usage or validation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .game import FourPlayerGame, GameError, StochasticGame, ThreePlayerGame, Verdict
from .io import export_dot, game_to_doc, parse_game, serialize_game, strategy_from_doc, strategy_to_doc

REPORT_SCHEMA = 1
BUDGET_ENV = "POGAMES_BUDGET"
EXIT_YES, EXIT_NO, EXIT_INCOMPLETE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return 10**6
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise UsageError(f"{BUDGET_ENV} must be positive")
    return value


def _read(path: str) -> tuple[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return text, hashlib.sha256(text.encode("utf-8")).hexdigest()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _exit_for(v: Verdict) -> int:
    if not v.complete:
        return EXIT_INCOMPLETE
    return EXIT_YES if v.yes else EXIT_NO


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, int) and abs(x) > 2**53:
        return str(x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


# ---------------------------------------------------------------------------
# subcommands


def _solve_game(g, method: str, m1: int, m2: int, budget: int, tree_path: str | None):
    from .counting import solve_counting_safety, tree_to_dot, unravel
    from .reductions import four_to_three, support_game
    from .solvers import bounded_solve, solve_three

    if isinstance(g, StochasticGame):
        # positive winning coincides with the three-player game on supports
        g3 = support_game(g)
        v = solve_three(g3, method="auto" if method == "counting" else method, m1=m1, m2=m2, budget=budget)
        v.diagnostics["via"] = "support-game"
        return g3, v
    if isinstance(g, FourPlayerGame):
        g = four_to_three(g)
    if method == "counting":
        v = solve_counting_safety(g, budget=budget)
        if tree_path:
            _write(tree_path, tree_to_dot(unravel(g, budget=budget)))
        return g, v
    if method == "bounded":
        return g, bounded_solve(g, m1=m1, m2=m2, budget=budget)
    return g, solve_three(g, method=method, m1=m1, m2=m2, budget=budget)


def cmd_solve(args, report):
    text, digest = _read(args.game)
    report["inputs"] = {args.game: digest}
    g = parse_game(text)
    g3, v = _solve_game(g, args.method, args.m1, args.m2, args.budget, args.tree)
    report["verdict"] = v.as_dict()
    if args.witness and v.witness is not None:
        _write(args.witness, json.dumps(strategy_to_doc(v.witness, g3.obs1, g3.states, g3.actions[0]), indent=1) + "\n")
        report["witness_file"] = args.witness
    return _exit_for(v)


def cmd_oracle(args, report):
    from .oracles import brute_force_four, brute_force_three, positive_winning_bounded

    text, digest = _read(args.game)
    report["inputs"] = {args.game: digest}
    g = parse_game(text)
    if isinstance(g, StochasticGame):
        v = positive_winning_bounded(g, g.objective.target, h=args.horizon)
    elif isinstance(g, FourPlayerGame):
        v = brute_force_four(g, h=args.horizon)
    else:
        v = brute_force_three(g, h=args.horizon)
    report["verdict"] = v.as_dict()
    if args.expect:
        etext, edigest = _read(args.expect)
        report["inputs"][args.expect] = edigest
        try:
            doc = json.loads(etext)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.expect}: {exc.msg}") from None
        expected = doc.get("verdict", doc)
        expected = expected.get("answer") if isinstance(expected, dict) else expected
        if expected not in ("YES", "NO"):
            raise UsageError(f"{args.expect} carries no YES/NO answer")
        agree = expected == v.answer
        report["agreement"] = {"expected": expected, "oracle": v.answer, "agree": agree}
        return EXIT_YES if agree else EXIT_NO
    return _exit_for(v)


REDUCTIONS = ("visible", "four-to-three", "uniform", "support")


def reduce_game(g, name: str):
    from .reductions import four_to_three, make_visible, support_game, uniform

    if name == "visible":
        if not isinstance(g, ThreePlayerGame):
            raise UsageError("visible needs a three-player game")
        h, o1, o2, obj = make_visible(g)
        return ThreePlayerGame(h.states, h.initial, h.actions, h.delta, o1, o2, obj)
    if name == "four-to-three":
        if not isinstance(g, FourPlayerGame):
            raise UsageError("four-to-three needs a four-player game")
        return four_to_three(g)
    if name == "uniform":
        if not isinstance(g, ThreePlayerGame):
            raise UsageError("uniform needs a three-player game")
        return uniform(g)
    if not isinstance(g, StochasticGame):
        raise UsageError("support needs a stochastic game")
    return support_game(g)


def cmd_reduce(args, report):
    text, digest = _read(args.game)
    report["inputs"] = {args.game: digest}
    g = parse_game(text)
    out = reduce_game(g, args.to)
    sizes = {"states_in": g.n, "states_out": out.n}
    provenance = {"source_sha256": digest, "reduction": args.to, "sizes": sizes}
    doc = serialize_game(out, provenance)
    if args.output:
        _write(args.output, doc)
        report["output"] = args.output
    else:
        sys.stdout.write(doc)
    report["reduction"] = provenance
    return EXIT_YES


def cmd_verify(args, report):
    from .reductions import four_to_three
    from .solvers import verify_strategy

    text, digest = _read(args.game)
    stext, sdigest = _read(args.strategy)
    report["inputs"] = {args.game: digest, args.strategy: sdigest}
    g = parse_game(text)
    if isinstance(g, FourPlayerGame):
        g = four_to_three(g)
    if not isinstance(g, ThreePlayerGame):
        raise UsageError("verify needs a three- or four-player game")
    try:
        sdoc = json.loads(stext)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.strategy}: {exc.msg}") from None
    sigma = strategy_from_doc(sdoc, g.obs1, g.states, g.actions[0])
    ok = verify_strategy(g, sigma1=sigma, budget=args.budget)
    report["winning"] = ok
    return EXIT_YES if ok else EXIT_NO


def cmd_gen_tm(args, report):
    from .hardness import load_machine, tm_accepts, tm_to_game, tm_to_stochastic

    text, digest = _read(args.machine)
    report["inputs"] = {args.machine: digest}
    m = load_machine(text)
    if args.space_exp < 1:
        raise UsageError("--space-exp must be at least 1")
    if args.stochastic:
        g, _, tg = tm_to_stochastic(m, args.word, args.space_exp)
    else:
        tg = tm_to_game(m, args.word, args.space_exp)
        g = tg.game
    manifest = {
        "machine": m.name,
        "machine_sha256": digest,
        "word": args.word,
        "space_exp": args.space_exp,
        "stochastic": args.stochastic,
        "expected": "YES" if tm_accepts(m, args.word, args.space_exp) else "NO",
        "sizes": {"states": g.n, "obs1_cells": len(g.obs1), "obs2_cells": len(g.obs2),
                  "a1": len(g.actions[0]), "a2": len(g.actions[1])},
        "phase_map": tg.phase_counts,
    }
    doc = serialize_game(g, {"generator": "gen-tm", "manifest": manifest})
    if args.output:
        _write(args.output, doc)
        report["output"] = args.output
    else:
        sys.stdout.write(doc)
    if args.manifest:
        _write(args.manifest, json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    report["manifest"] = manifest
    return EXIT_YES


def cmd_validate(args, report):
    from .game import less_informed

    text, digest = _read(args.game)
    report["inputs"] = {args.game: digest}
    g = parse_game(text)
    report["valid"] = True
    report["kind"] = game_to_doc(g)["kind"]
    report["states"] = g.n
    report["obs1_less_informed"] = less_informed(g.obs1, g.obs2)
    return EXIT_YES


def cmd_export(args, report):
    text, digest = _read(args.game)
    report["inputs"] = {args.game: digest}
    g = parse_game(text)
    verdict = None
    if args.witness:
        stext, sdigest = _read(args.witness)
        report["inputs"][args.witness] = sdigest
        if not isinstance(g, ThreePlayerGame):
            raise UsageError("witness highlighting needs a three-player game")
        sigma = strategy_from_doc(json.loads(stext), g.obs1, g.states, g.actions[0])
        verdict = Verdict(True, "supplied", sigma)
    out = export_dot(g, verdict) if args.format == "dot" else serialize_game(g)
    if args.output:
        _write(args.output, out)
        report["output"] = args.output
    else:
        sys.stdout.write(out)
    return EXIT_YES


def _sample_one(job):
    from . import corpus
    from .oracles import brute_force_three
    from .solvers import solve_three

    seed, i, kind, check = job
    rng = random.Random(f"{seed}:{i}")
    g = corpus.random_three(rng, kind=kind)
    entry = {"index": i, "states": g.n}
    if check:
        a = solve_three(g).answer
        b = brute_force_three(g).answer
        entry.update(solver=a, oracle=b, agree=a == b)
    return entry, serialize_game(g)


def cmd_sample(args, report):
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    jobs = [(args.seed, i, args.kind, args.check) for i in range(args.count)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sample_one, jobs))
    else:
        results = [_sample_one(j) for j in jobs]
    if args.outdir:
        os.makedirs(args.outdir, exist_ok=True)
        for entry, doc in results:
            _write(os.path.join(args.outdir, f"game{entry['index']:04d}.game"), doc)
    report["instances"] = [e for e, _ in results]
    if args.check:
        ok = all(e["agree"] for e, _ in results)
        report["all_agree"] = ok
        return EXIT_YES if ok else EXIT_NO
    return EXIT_YES


# ---------------------------------------------------------------------------
# parser and dispatch


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pogames", description="Partial-observation game solvers and oracles.")
    p.add_argument("--seed", type=int, default=0, help="seed for random corpus generation")
    p.add_argument("--jobs", type=int, default=1, help="worker process cap")
    p.add_argument("--report", help="also write the JSON report here")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def budget(sp):
        sp.add_argument("--budget", type=int, default=None, help=f"vertex ceiling (default ${BUDGET_ENV} or 1e6)")

    s = sub.add_parser("solve", help="decide a game")
    s.add_argument("game")
    s.add_argument("--method", choices=("auto", "knowledge", "bounded", "counting"), default="auto")
    s.add_argument("--m1", type=int, default=2)
    s.add_argument("--m2", type=int, default=1)
    budget(s)
    s.add_argument("--witness", help="write the winning Moore strategy here")
    s.add_argument("--tree", help="write the counting covering tree (DOT) here")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="decide a small game by exhaustive enumeration")
    o.add_argument("game")
    o.add_argument("--horizon", type=int, default=None)
    o.add_argument("--expect", help="report file or {\"answer\": ...} document to compare with")
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("reduce", help="apply a reduction and write the resulting game")
    r.add_argument("game")
    r.add_argument("--to", choices=REDUCTIONS, required=True)
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="check that a player-1 strategy is winning")
    v.add_argument("game")
    v.add_argument("strategy")
    budget(v)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("gen-tm", help="compile a Turing machine into a game")
    t.add_argument("machine")
    t.add_argument("--word", default="")
    t.add_argument("--space-exp", type=int, required=True)
    t.add_argument("--stochastic", action="store_true")
    t.add_argument("-o", "--output")
    t.add_argument("--manifest")
    t.set_defaults(func=cmd_gen_tm)

    a = sub.add_parser("validate", help="parse and validate a game file")
    a.add_argument("game")
    a.set_defaults(func=cmd_validate)

    e = sub.add_parser("export", help="export a game as DOT or normalized JSON")
    e.add_argument("game")
    e.add_argument("--format", choices=("dot", "json"), default="dot")
    e.add_argument("--witness")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_export)

    c = sub.add_parser("sample", help="write seeded random games, optionally cross-checked")
    c.add_argument("--count", type=int, default=10)
    c.add_argument("--kind", choices=("reach", "safe"), default=None)
    c.add_argument("--check", action="store_true", help="compare solver and oracle on each game")
    c.add_argument("--outdir")
    c.set_defaults(func=cmd_sample)
    return p


def dispatch(argv: list[str]) -> tuple[int, dict]:
    """Run one command; returns the exit code and the report."""
    from .reductions import BudgetExceeded

    report: dict = {"schema_version": REPORT_SCHEMA, "command": list(argv)}
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        report["subcommand"] = args.command
        if getattr(args, "budget", 0) is None:
            args.budget = default_budget()
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        code = args.func(args, report)
    except UsageError as exc:
        report["error"] = {"kind": "usage", "message": str(exc)}
        code = EXIT_USAGE
    except BudgetExceeded as exc:
        report["error"] = {"kind": "budget", "message": str(exc)}
        code = EXIT_INCOMPLETE
    except GameError as exc:
        report["error"] = {"kind": "validation", "message": str(exc)}
        code = EXIT_USAGE
    report["exit_code"] = code
    report["timing"] = {"wall_seconds": round(time.perf_counter() - start, 6)}
    return code, _jsonable(report)


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    code, report = dispatch(argv)
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--report")
    known, _ = pre.parse_known_args(argv)
    if known.report:
        _write(known.report, text)
    if report.get("error"):
        sys.stderr.write(f"error: {report['error']['message']}\n")
    # commands that print a document on stdout send the report to stderr
    documents = report.get("subcommand") in ("reduce", "gen-tm", "export") and "output" not in report
    (sys.stderr if documents and code == EXIT_YES else sys.stdout).write(text)
    return code
