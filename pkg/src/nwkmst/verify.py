"""Verification against the exact oracle and corpus benchmarking."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .instance import TOL, Instance, Solution, load_instance
from .oracle import ORACLE_CAP, brute_force_quota_tree
from .solver import SolveConfig, solve

log = logging.getLogger(__name__)

BENCH_HEADER = ["instance", "n", "quota", "epsilon", "ratio", "lower_bound_kind", "millis"]


def ratio_limit(epsilon: float) -> float:
    return 4 + 5 * math.sqrt(epsilon)


@dataclass
class VerifyResult:
    checks: dict[str, bool] = field(default_factory=dict)
    ratio: float | None = None
    opt_cost: float | None = None
    oracle_skipped: bool = False

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def check_solution(inst: Instance, nodes, cost: float) -> dict[str, bool]:
    sol = Solution.of(inst, nodes)
    return {
        "solution_contains_root": inst.root in sol.vertices,
        "solution_connected": sol.is_valid(inst),
        "solution_meets_quota": sol.profit >= inst.quota,
        "reported_cost_matches": abs(sol.cost - cost) <= 1e-6 * max(1.0, sol.cost),
    }


def verify_instance(inst: Instance, config: SolveConfig, report: dict | None = None,
                    cap: int = ORACLE_CAP) -> VerifyResult:
    """Check a report (solving first when none is given) against every
    invariant, and against the oracle ratio when the instance is small."""
    out = VerifyResult()
    if report is None:
        report = solve(inst, config).to_dict(inst)
    sol = report["solution"]
    out.checks.update(check_solution(inst, sol["nodes"], sol["cost"]))
    for name, value in report.get("checks", {}).items():
        if isinstance(value, bool):
            out.checks[name] = value
    if inst.n > cap:
        out.oracle_skipped = True
        log.warning("n=%d exceeds the oracle cap %d; ratio check skipped", inst.n, cap)
        return out
    opt = brute_force_quota_tree(inst, cap).opt_cost
    out.opt_cost = opt
    out.ratio = sol["cost"] / opt if opt > TOL else (1.0 if sol["cost"] <= TOL else math.inf)
    out.checks["ratio_within_limit"] = out.ratio <= ratio_limit(config.epsilon) + 1e-9
    out.checks["dual_bound_below_opt"] = report.get("dual_lower_bound", 0.0) <= opt + 1e-6
    return out


def bench_one(path: str, config: SolveConfig, cap: int = ORACLE_CAP) -> dict:
    inst = load_instance(Path(path).read_text())
    start = time.perf_counter()
    rep = solve(inst, config)
    millis = (time.perf_counter() - start) * 1e3
    if inst.n <= cap:
        ref, kind = brute_force_quota_tree(inst, cap).opt_cost, "oracle"
    else:
        ref, kind = rep.lower_bound, "dual"
    cost = rep.solution.cost
    if ref > TOL:
        ratio = cost / ref
    else:
        ratio = 1.0 if cost <= TOL else math.inf
    return {"instance": Path(path).name, "n": inst.n, "quota": inst.quota,
            "epsilon": config.epsilon, "ratio": ratio,
            "lower_bound_kind": kind, "millis": round(millis, 3)}


def bench_corpus(corpus: str | Path, config: SolveConfig, cap: int = ORACLE_CAP,
                 jobs: int = 1) -> list[dict]:
    """One row per ``*.json`` instance in ``corpus``, sorted by file name."""
    paths = sorted(str(p) for p in Path(corpus).glob("*.json"))
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(bench_one, paths, [config] * len(paths),
                                 [cap] * len(paths)))
    return [bench_one(p, config, cap) for p in paths]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
