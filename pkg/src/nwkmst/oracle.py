"""Exact exponential solvers for small instances.

Both search the connected vertex sets that contain the root.  Each such set
is generated exactly once: a branch adds one frontier vertex and forbids
every frontier vertex tried before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleError
from .instance import TOL, Instance, Solution
from .lagrangian import balance_bound

ORACLE_CAP = 18


@dataclass(frozen=True)
class OracleResult:
    opt_cost: float
    opt_solution: Solution
    explored: int


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _connected_sets(inst: Instance, visit):
    """Call ``visit(mask, cost, profit)`` for every connected root set.

    ``visit`` returns False to stop extending the current set.
    """
    nbr = [sum(1 << u for u in inst.adj[v]) for v in range(inst.n)]
    w = inst.weights
    p = inst.profit
    r = inst.root
    explored = 0

    def rec(S, frontier, banned, cost, prof):
        nonlocal explored
        explored += 1
        if not visit(S, cost, prof):
            return
        tried = 0
        for v in _bits(frontier):
            bit = 1 << v
            tried |= bit
            blocked = banned | tried
            nf = (frontier | nbr[v]) & ~(S | bit) & ~blocked
            rec(S | bit, nf, blocked, cost + w[v], prof + p[v])

    rec(1 << r, nbr[r], 0, w[r], p[r])
    return explored


def _check_cap(inst: Instance, cap: int):
    if inst.n > cap:
        raise ValueError(f"oracle cap exceeded: n={inst.n} > {cap}")


def brute_force_quota_tree(inst: Instance, cap: int = ORACLE_CAP) -> OracleResult:
    """Cheapest connected root set with profit at least the quota."""
    _check_cap(inst, cap)
    best = [math.inf, 0]

    def visit(S, cost, prof):
        if cost >= best[0] - TOL:
            return False
        if prof >= inst.quota:
            best[0], best[1] = cost, S
            return False
        return True

    explored = _connected_sets(inst, visit)
    if best[0] == math.inf:
        raise InfeasibleError("no connected root set reaches the quota")
    sol = Solution.of(inst, _bits(best[1]))
    return OracleResult(sol.cost, sol, explored)


def brute_force_pcst(inst: Instance, W=frozenset(), lam: float = 0.0,
                     cap: int = ORACLE_CAP) -> OracleResult:
    """Optimal prize-collecting tree: cost plus ``lam`` per uncollected profit,
    restricted to trees containing ``W``."""
    _check_cap(inst, cap)
    need = sum(1 << w for w in W)
    total = inst.total_profit
    best = [math.inf, 0]

    def visit(S, cost, prof):
        if cost >= best[0] - TOL:
            return False
        if S & need == need:
            val = cost + lam * (total - prof)
            if val < best[0] - TOL:
                best[0], best[1] = val, S
        return True

    explored = _connected_sets(inst, visit)
    if best[0] == math.inf:
        raise InfeasibleError("skeleton is not connectable to the root")
    return OracleResult(best[0], Solution.of(inst, _bits(best[1])), explored)


def ratio_report(inst: Instance, solution: Solution, oracle: OracleResult | None = None,
                 alpha2: float | None = None, beta: float | None = None,
                 cap: int = ORACLE_CAP) -> dict:
    """Approximation ratio of ``solution`` against the exact optimum.

    With ``alpha2`` and ``beta`` (c(T1)/OPT) the per-instance balanced bound
    is included for context.
    """
    if not solution.is_feasible(inst):
        raise AssertionError("algorithm output is not a feasible quota tree")
    res = oracle if oracle is not None else brute_force_quota_tree(inst, cap)
    if res.opt_cost <= TOL:
        ratio = 1.0 if solution.cost <= TOL else math.inf
    else:
        ratio = solution.cost / res.opt_cost
    out = {"opt_cost": res.opt_cost, "cost": solution.cost, "ratio": ratio,
           "opt_nodes": sorted(res.opt_solution.vertices), "explored": res.explored}
    if alpha2 is not None and beta is not None and alpha2 > 0:
        out["balance_bound"] = balance_bound(alpha2, beta)
    return out
