"""End-to-end solver: guess, prune, bracket, merge, keep the cheapest."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

from .errors import GuessRejected, InfeasibleError
from .instance import TOL, Instance, Solution, reachable
from .lagrangian import (SearchResult, binary_search_lambda, convex_bound_check,
                         dual_lower_bound, exact_bound_check)
from .merge import MergePlan, assemble_sol1, choose_best, merge_checks, plan_merge
from .moat import run_pcst
from .skeleton import (SkeletonGuess, decompose_skeleton, enumerate_guesses,
                       opt_ladder, prune_instance, skeleton_cap)

log = logging.getLogger(__name__)

SKELETON_MODES = ("heuristic", "exhaustive")


@dataclass(frozen=True)
class SolveConfig:
    epsilon: float = 0.5
    epsilon2: float | None = None
    max_skeleton: int = 2
    skeleton_mode: str = "heuristic"
    trace: bool = False
    seed: int = 0
    heuristic_rounds: int = 3

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.epsilon2 is not None and not self.epsilon2 > 0:
            raise ValueError("epsilon2 must be positive")
        if self.max_skeleton < 0:
            raise ValueError("max_skeleton must be non-negative")
        if self.skeleton_mode not in SKELETON_MODES:
            raise ValueError(f"skeleton_mode must be one of {SKELETON_MODES}")

    @property
    def eps2(self) -> float:
        return self.epsilon if self.epsilon2 is None else self.epsilon2


@dataclass
class GuessOutcome:
    """Everything one (W, OPT) guess produced, in the pruned instance's ids
    except ``solution`` (original ids)."""

    guess: SkeletonGuess
    sub: Instance
    W: frozenset[int]
    search: SearchResult
    solution: Solution
    kind: str
    plan: MergePlan | None = None
    sol1: Solution | None = None
    sol2: Solution | None = None
    connection_cost: float = 0.0
    checks: dict = field(default_factory=dict)


def _probe_checks(sub: Instance, search: SearchResult) -> dict:
    lmp = min(r.lmp_gap(sub) for r in search.probes)
    excess = max(r.max_dual_excess(sub) for r in search.probes)
    pot = min(r.min_potential for r in search.probes)
    return {
        "lmp_ok": lmp >= -1e-6 * sub.n,
        "lmp_min_gap": lmp,
        "dual_feasible": excess <= TOL * max(1.0, sub.max_cost) and pot >= -TOL,
        "trees_contain_skeleton": all(
            r.reduction.W <= r.tree.vertices and r.tree.is_valid(sub)
            for r in search.probes),
        "monotone": search.monotone,
    }


def solve_guess(inst: Instance, guess: SkeletonGuess, config: SolveConfig,
                caches: dict | None = None) -> GuessOutcome:
    """Run prune -> binary search -> merge for a single guess.

    Raises :class:`GuessRejected` when the guess cannot produce a tree.
    """
    pruned = prune_instance(inst, guess)
    sub, W = pruned.instance, pruned.W - {pruned.instance.root}
    cache = None
    if caches is not None:
        cache = caches.setdefault((sub.origin, W), {})
    search = binary_search_lambda(sub, W, guess.epsilon, guess.opt_guess, cache=cache)
    checks = _probe_checks(sub, search)
    if search.is_exact:
        tree = search.exact.tree
        checks["exact_chain_ok"] = exact_bound_check(sub, search.exact, guess.opt_guess)["chain_holds"]
        return GuessOutcome(guess, sub, W, search,
                            Solution.of(inst, sub.to_original(tree.vertices)),
                            "exact", checks=checks)
    pair = search.pair
    t1, t2 = pair.t1.tree, pair.t2.tree
    checks["pair_ok"] = (t1.profit < sub.quota < t2.profit
                         and abs(pair.alpha1 + pair.alpha2 - 1) <= TOL
                         and abs(pair.alpha1 * t1.profit + pair.alpha2 * t2.profit
                                 - sub.quota) <= 1e-6
                         and pair.t2.lam - pair.t1.lam
                         <= guess.epsilon * guess.opt_guess / (3 * sub.n) + TOL)
    checks["convex_chain_ok"] = convex_bound_check(sub, pair, guess.opt_guess)["chain_holds"]
    plan = plan_merge(sub, t1, t2, config.eps2)
    sol1, connection = assemble_sol1(sub, t1, plan, W, guess.budget)
    best = choose_best(sub, sol1, t2)
    mc = merge_checks(sub, plan, pair.alpha2, t2, config.eps2, sol1)
    checks.update({f"merge_{k}": v for k, v in mc.items() if isinstance(v, bool)})
    kind = "sol1" if best is sol1 else "sol2"
    return GuessOutcome(guess, sub, W, search,
                        Solution.of(inst, sub.to_original(best.vertices)), kind,
                        plan=plan, sol1=sol1, sol2=t2, connection_cost=connection,
                        checks=checks)


@dataclass
class SolveReport:
    solution: Solution
    best: GuessOutcome
    tried: int
    rejected: int
    checks: dict
    lower_bound: float
    config: SolveConfig
    outcomes: list[GuessOutcome] = field(default_factory=list, repr=False)

    def to_dict(self, inst: Instance) -> dict:
        b = self.best
        lag = None
        exact_lambda = None
        if b.search.pair is not None:
            lag = b.search.pair.record(b.sub)
        else:
            exact_lambda = b.search.exact.lam
        merge = b.plan.record(b.connection_cost) if b.plan is not None else None
        return {
            "instance": {"n": inst.n, "quota": inst.quota, "root": inst.root},
            "config": asdict(self.config),
            "solution": {"nodes": sorted(self.solution.vertices),
                         "cost": self.solution.cost,
                         "profit": self.solution.profit},
            "kind": b.kind,
            "guess": {"W": sorted(b.sub.to_original(b.W)),
                      "opt_guess": b.guess.opt_guess},
            "exact_lambda": exact_lambda,
            "lagrangian": lag,
            "merge": merge,
            "checks": self.checks,
            "guesses": {"tried": self.tried, "rejected": self.rejected},
            "dual_lower_bound": self.lower_bound,
        }


def _combine_checks(outcomes) -> dict:
    keys = sorted({k for o in outcomes for k, v in o.checks.items() if isinstance(v, bool)})
    out = {k: all(o.checks.get(k, True) for o in outcomes) for k in keys}
    out["lmp_min_gap"] = min(o.checks["lmp_min_gap"] for o in outcomes)
    return out


def _guesses(inst, config, incumbent, cap):
    """Heuristic guesses seeded by the incumbent tree."""
    eps = config.epsilon
    ladder = opt_ladder(inst, eps)
    if incumbent is None:
        return [SkeletonGuess(frozenset(), o, eps) for o in ladder]
    near = [o for o in ladder if o >= incumbent.cost * (1 - TOL)][:2] or ladder[-1:]
    skel = decompose_skeleton(inst, incumbent, eps, max(incumbent.cost, TOL))
    cands = sorted(skel, key=lambda v: (-inst.weights[v], v))
    sets = set()
    if cap:
        sets.add(frozenset(cands[:cap]))
        sets.update(frozenset([v]) for v in cands)
    return [SkeletonGuess(W, o, eps) for W in sorted(sets, key=sorted) for o in near]


def solve(inst: Instance, config: SolveConfig | None = None) -> SolveReport:
    """Best tree over all skeleton guesses of the configured mode."""
    config = config or SolveConfig()
    if inst.profit_of(reachable(inst, inst.root)) < inst.quota:
        raise InfeasibleError("the root's component cannot reach the quota")
    caches: dict = {}
    outcomes: list[GuessOutcome] = []
    tried = rejected = 0
    best: GuessOutcome | None = None
    seen = set()

    def attempt(guess):
        nonlocal tried, rejected, best
        key = (guess.W - {inst.root}, guess.opt_guess)
        if key in seen:
            return False
        seen.add(key)
        tried += 1
        try:
            out = solve_guess(inst, guess, config, caches)
        except GuessRejected as exc:
            rejected += 1
            log.debug("guess %s rejected: %s", sorted(guess.W), exc)
            return False
        outcomes.append(out)
        if best is None or out.solution.cost < best.solution.cost:
            best = out
            return True
        return False

    cap = skeleton_cap(config.epsilon, config.max_skeleton)
    if config.skeleton_mode == "exhaustive":
        for guess in enumerate_guesses(inst, config.epsilon, config.max_skeleton):
            attempt(guess)
    else:
        for guess in _guesses(inst, config, None, cap):
            attempt(guess)
        seed = best.solution if best else None
        if seed is None:
            # nothing survives without a skeleton: seed from the unpruned search
            full = binary_search_lambda(inst, frozenset(), config.epsilon,
                                        max(sum(inst.weights), TOL))
            seed = full.exact.tree if full.is_exact else full.pair.t2.tree
        for _ in range(config.heuristic_rounds):
            improved = False
            for guess in _guesses(inst, config, seed, cap):
                improved |= attempt(guess)
            if not improved or best is None:
                break
            seed = best.solution
        if best is None:
            for guess in _guesses(inst, config, seed, len(inst.weights)):
                attempt(guess)
    if best is None:
        raise InfeasibleError("every skeleton guess was rejected")
    lb_search = binary_search_lambda(inst, frozenset(), config.epsilon,
                                     max(best.solution.cost, TOL))
    lower = dual_lower_bound(inst, lb_search.probes)
    checks = _combine_checks(outcomes)
    checks["solution_feasible"] = best.solution.is_feasible(inst)
    return SolveReport(best.solution, best, tried, rejected, checks, lower,
                       config, outcomes)


def _json_safe(value):
    """Replace infinite potentials (forced skeleton moats) by the string "inf"."""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else "-inf"
    return value


def trace_records(report: SolveReport) -> list[dict]:
    """Replay the moat runs behind the best guess with event tracing on."""
    b = report.best
    lams = ([b.search.exact.lam] if b.search.is_exact
            else [b.search.pair.t1.lam, b.search.pair.t2.lam])
    records = []
    for lam in lams:
        run = run_pcst(b.sub, b.W, lam, trace=True)
        for ev in run.trace:
            rec = dict(ev)
            rec["potentials"] = _json_safe(ev["potentials"])
            rec["lambda"] = lam
            rec["nodes"] = [b.sub.origin[v] for v in ev["nodes"]]
            records.append(rec)
    return records


def ratio(cost: float, reference: float) -> float:
    if reference <= TOL:
        return 1.0 if cost <= TOL else math.inf
    return cost / reference
