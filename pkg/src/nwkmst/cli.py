"""``nwkmst`` command line: gen, solve, oracle, verify, bench."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import InfeasibleError, InstanceError, InvariantViolation
from .generators import (COST_DISTRIBUTIONS, GadgetParams, MestreParams,
                         gen_planar_grid, handicap_instance, mestre_instance,
                         reduce_partial_cover)
from .instance import load_instance
from .oracle import ORACLE_CAP, brute_force_quota_tree
from .solver import SKELETON_MODES, SolveConfig, solve, trace_records
from .verify import bench_corpus, rows_to_csv, verify_instance

EXIT_OK, EXIT_INFEASIBLE, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2, 3

log = logging.getLogger("nwkmst")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, dest: str | None):
    if dest in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(dest).write_text(text if text.endswith("\n") else text + "\n")


def _read_instance(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return load_instance(text)


def _config(args) -> SolveConfig:
    try:
        return SolveConfig(epsilon=args.epsilon, epsilon2=args.epsilon2,
                           max_skeleton=args.max_skeleton,
                           skeleton_mode=args.skeleton_mode,
                           trace=bool(getattr(args, "trace", None)), seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args) -> int:
    if args.kind == "grid":
        inst = gen_planar_grid(args.rows, args.cols, args.dist, args.seed, args.quota)
    elif args.kind == "cover":
        if not args.sets:
            raise UsageError("--kind cover needs --sets FILE")
        data = json.loads(Path(args.sets).read_text())
        sets = [(c, list(el)) for c, el in data["sets"]]
        inst = reduce_partial_cover(sets, data["n_elements"],
                                    data.get("target", data["n_elements"]))
    elif args.kind == "mestre":
        inst = mestre_instance(MestreParams(args.q, args.r))
    else:
        gp = GadgetParams(args.q, args.gamma, args.eps_perturb)
        inst = handicap_instance(MestreParams(args.q, args.r), gp)
    _emit(inst.dumps(), args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    config = _config(args)
    report = solve(inst, config)
    _emit(json.dumps(report.to_dict(inst), indent=2), args.output)
    if args.trace:
        lines = [json.dumps(rec) for rec in trace_records(report)]
        Path(args.trace).write_text("\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _read_instance(args.instance)
    if inst.n > args.cap:
        raise UsageError(f"n={inst.n} exceeds the oracle cap {args.cap}")
    res = brute_force_quota_tree(inst, args.cap)
    _emit(json.dumps({"opt_cost": res.opt_cost,
                      "opt_nodes": sorted(res.opt_solution.vertices),
                      "profit": res.opt_solution.profit,
                      "explored": res.explored}, indent=2), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _config(args)
    failed = 0
    for path in args.instances:
        inst = _read_instance(path)
        report = None
        if args.report:
            report = json.loads(Path(args.report).read_text())
        res = verify_instance(inst, config, report, cap=args.cap)
        for name, ok in res.checks.items():
            if not ok or args.verbose:
                print(f"{path}: {name}: {'PASS' if ok else 'FAIL'}")
        tail = ("oracle skipped" if res.oracle_skipped
                else f"ratio {res.ratio:.4f} vs opt {res.opt_cost:g}")
        print(f"{path}: {'PASS' if res.ok else 'FAIL'} ({tail})")
        failed += not res.ok
    return EXIT_INVARIANT if failed else EXIT_OK


def cmd_bench(args) -> int:
    if not Path(args.corpus).is_dir():
        raise UsageError(f"{args.corpus} is not a directory")
    rows = bench_corpus(args.corpus, _config(args), cap=args.cap, jobs=args.jobs)
    _emit(rows_to_csv(rows), args.output)
    return EXIT_OK


def _solver_flags(p):
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--epsilon2", type=float, default=None)
    p.add_argument("--max-skeleton", type=int, default=2)
    p.add_argument("--skeleton-mode", choices=SKELETON_MODES, default="heuristic")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nwkmst", description=__doc__)
    parser.add_argument("-v", "--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", choices=("grid", "cover", "mestre", "handicap"), required=True)
    g.add_argument("--rows", type=int, default=3)
    g.add_argument("--cols", type=int, default=3)
    g.add_argument("--dist", choices=COST_DISTRIBUTIONS, default="uniform")
    g.add_argument("--quota", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sets", help="JSON file {sets: [[cost, [elements]]], n_elements, target}")
    g.add_argument("--q", type=int, default=2)
    g.add_argument("--r", type=float, default=3.0)
    g.add_argument("--gamma", type=int, default=None)
    g.add_argument("--eps-perturb", type=float, default=1e-6)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run the approximation pipeline")
    s.add_argument("instance")
    _solver_flags(s)
    s.add_argument("--trace", metavar="JSONL", help="write moat events of the best guess")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exact optimum by enumeration")
    o.add_argument("instance")
    o.add_argument("--cap", type=int, default=ORACLE_CAP)
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("verify", help="solve and check against invariants and the oracle")
    v.add_argument("instances", nargs="+")
    _solver_flags(v)
    v.add_argument("--report", help="verify this report instead of solving")
    v.add_argument("--cap", type=int, default=ORACLE_CAP)
    v.add_argument("--verbose", action="store_true")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="ratio table over a corpus directory")
    b.add_argument("corpus")
    _solver_flags(b)
    b.add_argument("--cap", type=int, default=ORACLE_CAP)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
