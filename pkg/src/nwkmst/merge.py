"""Tree merging: top up the small tree T1 with cheap vertices of T2.

T2 is contracted onto T1 (the shared part becomes a zero-cost super root),
a spanning tree of the result is repeatedly split or contracted until it is
a star of cost-effective leaves, and leaves are then taken in decreasing
profit order.  The leaf that would overshoot is opened up and the procedure
recurses on it with the (at most halved) remaining demand; the last level
takes its leaf whole.  Each level is hooked to T1 through one shortest path.

Cost-effectiveness is measured against the contracted tree's average
cost per unit of profit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import GuessRejected, InvariantViolation
from .instance import (TOL, Instance, Solution, distances_to_set,
                       is_connected, node_weighted_shortest_path)

log = logging.getLogger(__name__)

#: Key of the contracted super root inside a :class:`ContractedTree`.
SUPER_ROOT = -1


@dataclass(frozen=True)
class SuperNode:
    key: int
    members: tuple[int, ...]
    cost: float
    profit: int

    @property
    def is_super(self) -> bool:
        return len(self.members) > 1


@dataclass
class ContractedTree:
    """Spanning tree of T2 with T1 & T2 collapsed into :data:`SUPER_ROOT`.

    Keys are vertex ids of T2 - T1, plus the super root.
    """

    inst: Instance
    shared: frozenset[int]
    adj: dict[int, list[int]]
    cost: dict[int, float]
    profit: dict[int, int]
    total_cost: float
    total_profit: int

    @property
    def degenerate(self) -> bool:
        return len(self.adj) <= 1

    def is_cost_effective(self, cost: float, profit: int) -> bool:
        lhs = cost * self.total_profit
        rhs = self.total_cost * profit
        return lhs <= rhs + TOL * max(1.0, abs(rhs))


def contract(inst: Instance, t1: Solution, t2: Solution) -> ContractedTree:
    shared = t1.vertices & t2.vertices
    if inst.root not in shared:
        raise ValueError("both trees must contain the root")
    rest = t2.vertices - t1.vertices
    graph = {SUPER_ROOT: set()}
    for u in rest:
        graph[u] = set()
    for u in rest:
        for v in inst.adj[u]:
            if v in rest:
                graph[u].add(v)
            elif v in shared:
                graph[u].add(SUPER_ROOT)
                graph[SUPER_ROOT].add(u)
    # BFS spanning tree, smallest keys first
    adj = {k: [] for k in graph}
    seen = {SUPER_ROOT}
    queue = [SUPER_ROOT]
    for u in queue:
        for v in sorted(graph[u]):
            if v not in seen:
                seen.add(v)
                adj[u].append(v)
                adj[v].append(u)
                queue.append(v)
    if len(seen) != len(graph):
        raise ValueError("T2 is not connected")
    cost = {k: (0.0 if k == SUPER_ROOT else inst.weights[k]) for k in graph}
    profit = {k: (0 if k == SUPER_ROOT else inst.profit[k]) for k in graph}
    return ContractedTree(inst, frozenset(shared), adj, cost, profit,
                          sum(cost.values()), sum(profit.values()))


@dataclass
class StarGraph:
    center: SuperNode | None
    leaves: list[SuperNode]
    anomaly: str | None = None
    steps: int = 0

    @property
    def nodes(self) -> list[SuperNode]:
        return ([self.center] if self.center else []) + self.leaves


class _WorkTree:
    """Mutable tree of super nodes used by :func:`reduce_to_star`."""

    def __init__(self, ct: ContractedTree, keys):
        keys = set(keys)
        self.ct = ct
        self.nodes = {k: SuperNode(k, (k,), ct.cost[k], ct.profit[k]) for k in keys}
        self.adj = {k: set(v for v in ct.adj[k] if v in keys) for k in keys}
        self.next_key = max(max(keys), ct.inst.n) + 1

    def edges(self):
        return sorted((a, b) for a in self.adj for b in self.adj[a] if a < b)

    def layout(self):
        """Preorder, parent map and subtree extents from the smallest key."""
        start = min(self.adj)
        order, parent = [], {start: None}
        stack = [start]
        while stack:
            u = stack.pop()
            order.append(u)
            for v in sorted(self.adj[u], reverse=True):
                if v != parent[u]:
                    parent[v] = u
                    stack.append(v)
        pos = {k: i for i, k in enumerate(order)}
        size = {k: 1 for k in order}
        for u in reversed(order):
            if parent[u] is not None:
                size[parent[u]] += size[u]
        return order, parent, pos, size

    def remove(self, keys):
        for k in keys:
            for v in self.adj.pop(k):
                if v in self.adj:
                    self.adj[v].discard(k)
            del self.nodes[k]

    def contract(self, keys):
        keys = set(keys)
        outside = {v for k in keys for v in self.adj[k]} - keys
        members = tuple(sorted(m for k in keys for m in self.nodes[k].members))
        node = SuperNode(self.next_key, members,
                         sum(self.nodes[k].cost for k in keys),
                         sum(self.nodes[k].profit for k in keys))
        self.next_key += 1
        self.remove(keys)
        self.nodes[node.key] = node
        self.adj[node.key] = set(outside)
        for v in outside:
            self.adj[v].add(node.key)
        return node


def reduce_to_star(ct: ContractedTree, q: int, keys=None) -> StarGraph:
    """Split/contract the tree on ``keys`` (default: all) into a star.

    For the first edge (in key order) with a cost-effective side that makes
    progress: a side with profit >= q survives and the other side is cut
    away, a smaller multi-node side is contracted into a super node.
    Among two cost-effective sides the larger profit is tried first.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    wt = _WorkTree(ct, ct.adj.keys() if keys is None else keys)
    steps = 0
    while len(wt.nodes) > 1:
        order, parent, pos, size = wt.layout()
        total_c = sum(n.cost for n in wt.nodes.values())
        total_p = sum(n.profit for n in wt.nodes.values())
        # subtree sums
        sub_c = {k: wt.nodes[k].cost for k in order}
        sub_p = {k: wt.nodes[k].profit for k in order}
        for u in reversed(order):
            if parent[u] is not None:
                sub_c[parent[u]] += sub_c[u]
                sub_p[parent[u]] += sub_p[u]
        progressed = False
        for a, b in wt.edges():
            child = b if parent.get(b) == a else a
            sides = [(True, sub_c[child], sub_p[child]),
                     (False, total_c - sub_c[child], total_p - sub_p[child])]
            good = [s for s in sides if ct.is_cost_effective(s[1], s[2])]
            if not good:
                raise InvariantViolation(
                    f"edge ({a}, {b}) has no cost-effective side: "
                    f"{sides[0][1]}/{sides[0][2]} and {sides[1][1]}/{sides[1][2]} "
                    f"vs {ct.total_cost}/{ct.total_profit}")
            good.sort(key=lambda s: -s[2])
            for is_inner, _, prof in good:
                n_side = size[child] if is_inner else len(order) - size[child]
                if prof < q and n_side < 2:
                    continue
                inner = order[pos[child]:pos[child] + size[child]]
                inner_set = set(inner)
                outer = [k for k in order if k not in inner_set]
                side, other = (inner, outer) if is_inner else (outer, inner)
                if prof >= q:
                    wt.remove(other)
                else:
                    wt.contract(side)
                progressed = True
                break
            if progressed:
                steps += 1
                break
        if not progressed:
            break
    return _as_star(ct, wt, steps)


def _as_star(ct, wt, steps):
    nodes = list(wt.nodes.values())
    if len(nodes) == 1:
        return StarGraph(None, nodes, steps=steps)
    if len(nodes) == 2:
        ce = [ct.is_cost_effective(n.cost, n.profit) for n in nodes]
        if all(ce):
            return StarGraph(None, sorted(nodes, key=lambda n: n.key), steps=steps)
        hub = nodes[ce.index(False)]
        return StarGraph(hub, [n for n in nodes if n is not hub], steps=steps)
    hubs = [k for k, nb in wt.adj.items() if len(nb) >= 2]
    if len(hubs) != 1:
        raise InvariantViolation("split loop stopped on a non-star tree")
    hub = wt.nodes[hubs[0]]
    anomaly = None
    if hub.is_super:
        anomaly = f"star center {hub.key} is a super vertex"
        log.warning(anomaly)
    leaves = [n for n in nodes if n is not hub]
    return StarGraph(hub, leaves, anomaly=anomaly, steps=steps)


def levels_for(epsilon2: float) -> int:
    return max(2, math.ceil(math.log2(4 / epsilon2) - TOL))


@dataclass
class LevelRecord:
    q: int
    taken: list[SuperNode]
    hub: SuperNode | None
    hub_picked: bool
    recursed: SuperNode | None


@dataclass
class MergePlan:
    q: int
    picked: frozenset[int]
    centers: list[int]
    connection_paths: list[list[int]] = field(default_factory=list)
    total_cost: float = 0.0
    levels_used: int = 0
    levels: list[LevelRecord] = field(default_factory=list)
    ratio: float = 0.0
    anomalies: list[str] = field(default_factory=list)

    def record(self, connection_cost: float = 0.0) -> dict:
        return {"q": self.q, "levels": self.levels_used, "centers": self.centers,
                "picked_size": len(self.picked), "picked_cost": self.total_cost,
                "connection_cost": connection_cost}


def pick_leaves(ct: ContractedTree, star: StarGraph, q: int, epsilon2: float) -> MergePlan:
    """Choose at least ``q`` profit worth of cost-effective pieces."""
    max_levels = levels_for(epsilon2)
    levels: list[LevelRecord] = []
    anomalies = []
    picked_keys: set[int] = set()
    while True:
        if star.anomaly:
            anomalies.append(star.anomaly)
        level = len(levels) + 1
        if level > max_levels:
            raise InvariantViolation("merge recursion exceeded its level budget")
        leaves = sorted(star.leaves, key=lambda n: (-n.profit, n.key))
        s = [n.profit for n in leaves]
        recurse = None
        hub_picked = False
        if sum(s) < q:
            if star.center is None:
                raise InvariantViolation("pieces cannot cover the demand")
            taken = leaves + [star.center]
            hub_picked = True
        else:
            i = 0
            acc = 0
            while acc + s[i] < q:
                acc += s[i]
                i += 1
            full = (acc + s[i] == q or level == max_levels
                    or not leaves[i].is_super)
            if full:
                taken = leaves[:i + 1]
            else:
                taken = leaves[:i]
                recurse = leaves[i]
        for n in taken:
            picked_keys.update(n.members)
        levels.append(LevelRecord(q, taken, star.center, hub_picked, recurse))
        if recurse is None:
            break
        q = q - sum(n.profit for n in taken)
        star = reduce_to_star(ct, q, keys=recurse.members)
    inst = ct.inst
    picked = frozenset(k for k in picked_keys if k != SUPER_ROOT)
    plan = MergePlan(q=levels[0].q, picked=picked, centers=[],
                     total_cost=inst.cost_of(picked), levels_used=len(levels),
                     levels=levels, ratio=ct.total_cost / ct.total_profit,
                     anomalies=anomalies)
    return plan


def plan_merge(inst: Instance, t1: Solution, t2: Solution, epsilon2: float):
    """Contract, reduce and pick; ``None`` when T1 already meets the quota."""
    q = inst.quota - t1.profit
    if q <= 0:
        return None
    ct = contract(inst, t1, t2)
    if ct.degenerate:
        raise InvariantViolation("T2 adds nothing to T1 yet T1 misses the quota")
    star = reduce_to_star(ct, q)
    return pick_leaves(ct, star, q, epsilon2)


def assemble_sol1(inst: Instance, t1: Solution, plan: MergePlan | None, W,
                  budget: float) -> tuple[Solution, float]:
    """Join T1, the picked pieces and one shortest path per level.

    Returns SOL1 and the cost paid for hubs and paths (vertices already
    bought are free).  Every path starts at a vertex that must lie within
    ``budget`` of W + root.
    """
    if plan is None or not plan.picked:
        return t1, 0.0
    chosen = set(t1.vertices) | set(plan.picked)
    anchor_dist = distances_to_set(inst, set(W) | {inst.root})
    extra = 0.0
    plan.centers = []
    plan.connection_paths = []
    for lev in plan.levels:
        if not lev.taken:
            continue
        group = {m for n in lev.taken for m in n.members}
        if lev.hub is not None:
            hub = set(lev.hub.members)
            group |= hub
            fresh = (hub - {SUPER_ROOT}) - chosen
            extra += inst.cost_of(fresh)
            chosen |= fresh
        else:
            hub = group
        if SUPER_ROOT in group:
            # the group already touches T1 through the super root
            plan.centers.append(inst.root)
            plan.connection_paths.append([inst.root])
            continue
        start = min(hub, key=lambda m: (anchor_dist[m], m))
        if anchor_dist[start] > budget + TOL * max(1.0, budget):
            raise GuessRejected(f"connector {start} lies outside the skeleton budget")
        weights = [0.0 if v in chosen else inst.weights[v] for v in range(inst.n)]
        path, _ = node_weighted_shortest_path(inst, start, t1.vertices, weights)
        fresh = set(path) - chosen
        extra += inst.cost_of(fresh)
        chosen |= fresh
        plan.centers.append(start)
        plan.connection_paths.append(path)
    if not is_connected(inst, chosen):
        raise InvariantViolation("SOL1 is not connected")
    return Solution.of(inst, chosen), extra


def merge_checks(inst: Instance, plan: MergePlan, alpha2: float, t2: Solution,
                 epsilon2: float, sol1: Solution | None = None) -> dict:
    """Numerical certificates for a merge plan."""
    profit = inst.profit_of(plan.picked)
    bound = (1 + epsilon2) * alpha2 * t2.cost
    qs = [lev.q for lev in plan.levels]
    ce_ok = all(n.cost <= plan.ratio * n.profit + TOL * max(1.0, plan.ratio * n.profit)
                for lev in plan.levels for n in lev.taken if not lev.hub_picked)
    out = {
        "profit_ok": profit >= plan.q,
        "cost_ok": plan.total_cost <= bound + 1e-6,
        "cost_bound": bound,
        "levels_ok": plan.levels_used <= levels_for(epsilon2),
        "halving_ok": all(b <= a / 2 + TOL for a, b in zip(qs, qs[1:])),
        "overpick_ok": profit <= (1 + 2.0 ** (-plan.levels_used + 2)) * plan.q + TOL
        or any(l.hub_picked for l in plan.levels),
        "cost_effective_ok": ce_ok,
    }
    if sol1 is not None:
        out["sol1_connected"] = is_connected(inst, sol1.vertices)
        out["sol1_feasible"] = sol1.is_feasible(inst)
    return out


def choose_best(inst: Instance, sol1: Solution, sol2: Solution) -> Solution:
    for name, sol in (("SOL1", sol1), ("SOL2", sol2)):
        if not sol.is_feasible(inst):
            raise InvariantViolation(f"{name} is infeasible")
    return sol1 if sol1.cost <= sol2.cost else sol2
