"""Lagrangian binary search over the penalty and the balancing bound.

The search probes the moat algorithm with uniform per-profit penalty
``lam``.  Either some probe reaches the quota exactly (or lam = 0 already
does), or two probes bracket it closely enough that the convex combination
of their trees is within (3 + eps) of the optimum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import GuessRejected, InvariantViolation
from .instance import TOL, Instance, Solution
from .moat import MoatRunResult, run_pcst

log = logging.getLogger(__name__)


@dataclass
class LagrangePair:
    t1: MoatRunResult
    t2: MoatRunResult
    alpha1: float
    alpha2: float
    opt_guess: float
    epsilon: float

    def record(self, inst: Instance) -> dict:
        chk = convex_bound_check(inst, self, self.opt_guess)
        return {
            "lambda1": self.t1.lam,
            "lambda2": self.t2.lam,
            "size_t1": len(self.t1.tree),
            "size_t2": len(self.t2.tree),
            "alpha2": self.alpha2,
            "ds1": self.t1.dual_value,
            "ds2": self.t2.dual_value,
            "convex_lhs": chk["lhs"],
            "bound_rhs": chk["rhs"],
        }


@dataclass
class SearchResult:
    """Outcome of :func:`binary_search_lambda`.

    Exactly one of ``exact`` and ``pair`` is set.  ``probes`` lists every
    moat run in probing order.
    """

    exact: MoatRunResult | None
    pair: LagrangePair | None
    probes: list[MoatRunResult] = field(default_factory=list)
    bisections: int = 0
    monotone: bool = True

    @property
    def is_exact(self) -> bool:
        return self.exact is not None


def lambda_upper(inst: Instance) -> float:
    return max(inst.n * inst.max_cost, 1.0)


def stop_width(inst: Instance, epsilon: float, opt_guess: float) -> float:
    # profits above 1 scale the penalty; n is the unit-profit case
    return epsilon * opt_guess / (3 * max(inst.n, inst.total_profit))


def max_bisections(inst: Instance, epsilon: float, opt_guess: float) -> int:
    ratio = lambda_upper(inst) / stop_width(inst, epsilon, opt_guess)
    return max(0, math.ceil(math.log2(ratio))) + 1


def binary_search_lambda(inst: Instance, W, epsilon: float, opt_guess: float,
                         cache: dict | None = None) -> SearchResult:
    """Bracket the quota between two moat trees.

    ``cache`` (optional) memoizes moat runs by ``lam`` for repeated searches
    over the same instance and skeleton.
    """
    quota = inst.quota
    probes = []

    def probe(lam):
        if cache is not None and lam in cache:
            res = cache[lam]
        else:
            res = run_pcst(inst, W, lam)
            if cache is not None:
                cache[lam] = res
        probes.append(res)
        return res

    zero = probe(0.0)
    if zero.tree.profit >= quota:
        return SearchResult(exact=zero, pair=None, probes=probes)
    hi_lam = lambda_upper(inst)
    hi = probe(hi_lam)
    if hi.tree.profit < quota:
        raise GuessRejected("largest penalty still misses the quota")
    if hi.tree.profit == quota:
        return SearchResult(exact=hi, pair=None, probes=probes)
    lo = zero
    width = stop_width(inst, epsilon, opt_guess)
    steps = 0
    monotone = True
    while hi.lam - lo.lam > width:
        mid = probe((lo.lam + hi.lam) / 2)
        steps += 1
        if mid.tree.profit < lo.tree.profit or mid.tree.profit > hi.tree.profit:
            monotone = False
            log.info("non-monotone tree size at lambda=%g", mid.lam)
        if mid.tree.profit == quota:
            return SearchResult(exact=mid, pair=None, probes=probes,
                                bisections=steps, monotone=monotone)
        if mid.tree.profit < quota:
            lo = mid
        else:
            hi = mid
    p1, p2 = lo.tree.profit, hi.tree.profit
    if not p1 < quota < p2:
        raise InvariantViolation("binary search lost its bracket")
    alpha2 = (quota - p1) / (p2 - p1)
    pair = LagrangePair(t1=lo, t2=hi, alpha1=1 - alpha2, alpha2=alpha2,
                        opt_guess=opt_guess, epsilon=epsilon)
    return SearchResult(exact=None, pair=pair, probes=probes,
                        bisections=steps, monotone=monotone)


def convex_bound_check(inst: Instance, pair: LagrangePair, opt: float,
                       factor: float = 3.0) -> dict:
    """Convex-combination bound of a bracketing pair against ``opt``.

    ``lhs`` is the mixed cost; ``rhs`` is (factor + eps) * opt; ``chain`` is
    the intermediate dual expression the mixed cost must not exceed.
    """
    a1, a2 = pair.alpha1, pair.alpha2
    c1, c2 = pair.t1.tree.cost, pair.t2.tree.cost
    l1, l2 = pair.t1.lam, pair.t2.lam
    total = inst.total_profit
    lhs = a1 * c1 + a2 * c2
    chain = factor * (a1 * pair.t1.dual_value + a2 * pair.t2.dual_value
                      - l2 * (total - inst.quota) + (l2 - l1) * total)
    rhs = (factor + pair.epsilon) * opt
    slack = 1e-6
    return {"lhs": lhs, "chain": chain, "rhs": rhs,
            "chain_holds": lhs <= chain + slack,
            "holds": lhs <= rhs + slack}


def exact_bound_check(inst: Instance, run: MoatRunResult, opt: float,
                      factor: float = 3.0) -> dict:
    """Single-tree form of the chain: c(T) + f*lam*(quota - p(T)) <= f*(DS - lam*(P - quota))."""
    lhs = run.tree.cost + factor * run.lam * (inst.quota - run.tree.profit)
    chain = factor * (run.dual_value - run.lam * (inst.total_profit - inst.quota))
    return {"lhs": lhs, "chain": chain, "rhs": factor * opt,
            "chain_holds": lhs <= chain + 1e-6,
            "holds": run.tree.cost <= factor * opt + 1e-6}


def dual_lower_bound(inst: Instance, runs) -> float:
    """Best Lagrangian dual bound ``DS - lam * (P - quota)``, floored at 0.

    Only a valid bound on OPT for runs made without a forced skeleton on the
    full instance.
    """
    slack = inst.total_profit - inst.quota
    return max([0.0] + [r.dual_value - r.lam * slack for r in runs])


def balance_bound(alpha: float, beta: float, r: float = 3.0, delta: float = 0.0) -> float:
    """min{(r(1+d) - (1-a)b)/a, r(1+d) + a*b} for the cheaper of the two
    final solutions, with a = alpha2 and b = c(T1)/OPT."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    base = r * (1 + delta)
    return min((base - (1 - alpha) * beta) / alpha, base + alpha * beta)


def balance_max(r: float = 3.0, delta: float = 0.0, step: float = 1e-3,
                refine: int = 3) -> tuple[float, float, float]:
    """Grid maximum of :func:`balance_bound` over alpha in (0,1), beta in [0,r].

    Returns ``(value, alpha, beta)``.  The coarse grid is refined ``refine``
    times around the incumbent.
    """
    import numpy as np

    def sweep(a_lo, a_hi, b_lo, b_hi, h):
        a = np.arange(a_lo, a_hi + h / 2, h)
        a = a[(a > 0) & (a < 1)]
        b = np.arange(b_lo, b_hi + h / 2, h)
        b = b[(b >= 0) & (b <= r)]
        A, B = np.meshgrid(a, b, indexing="ij")
        base = r * (1 + delta)
        vals = np.minimum((base - (1 - A) * B) / A, base + A * B)
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        return float(vals[i, j]), float(a[i]), float(b[j])

    best = sweep(step, 1 - step, 0.0, r, step)
    h = step
    for _ in range(refine):
        _, a0, b0 = best
        h /= 20
        cand = sweep(a0 - 20 * h, a0 + 20 * h, max(0.0, b0 - 20 * h), min(r, b0 + 20 * h), h)
        if cand[0] > best[0]:
            best = cand
    return best
