"""Primal-dual moat growing for node-weighted prize-collecting Steiner tree.

Every non-root vertex outside the forced set W pays ``lam * profit`` when it
is left out.  The dual variable p_v = min(cost, penalty) is fixed up front;
what remains is either a *terminal* (zero reduced cost, positive reduced
penalty) or a *Steiner* vertex (zero reduced penalty).  Vertices of W are
terminals with infinite penalty, so their moats never run dry.

Growth is simulated as a discrete-event process.  At time 0 the root and all
terminals are bought; the moats are the connected components of the bought
vertices.  Active moats raise their dual at unit rate, loading every unbought
neighbour and draining their own potential.  Ties within the tolerance are
resolved vertex events first, then by lowest id.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .errors import GuessRejected, InvariantViolation
from .instance import TOL, Instance, Solution, reachable

INF = math.inf

_VERTEX, _MOAT = 0, 1


@dataclass(frozen=True)
class PenaltyReduction:
    lam: float
    W: frozenset[int]
    p: tuple[float, ...]
    reduced_cost: tuple[float, ...]
    reduced_penalty: tuple[float, ...]
    is_terminal: tuple[bool, ...]

    @property
    def terminals(self) -> frozenset[int]:
        return frozenset(v for v, t in enumerate(self.is_terminal) if t)


def reduce_penalties(inst: Instance, W, lam: float) -> PenaltyReduction:
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    W = frozenset(W)
    p, rc, rp, term = [], [], [], []
    for v in range(inst.n):
        c = inst.weights[v]
        if v == inst.root:
            p.append(0.0), rc.append(0.0), rp.append(0.0), term.append(False)
        elif v in W:
            p.append(c), rc.append(0.0), rp.append(INF), term.append(True)
        else:
            penalty = lam * inst.profit[v]
            pv = min(c, penalty)
            p.append(pv)
            rc.append(max(c - pv, 0.0))
            rp.append(max(penalty - pv, 0.0))
            term.append(rp[-1] > 0)
    return PenaltyReduction(lam, W, tuple(p), tuple(rc), tuple(rp), tuple(term))


class _Moat:
    __slots__ = ("id", "members", "boundary", "unmarked", "active",
                 "has_root", "death", "pot", "version")

    def __init__(self, mid, members, boundary, unmarked, has_root, potential, now):
        self.id = mid
        self.members = members
        self.boundary = boundary
        self.unmarked = unmarked
        self.has_root = has_root
        self.version = 0
        self.active = False
        self.death = INF
        self.pot = potential
        self.set_potential(potential, now)

    def potential(self, now):
        return (self.death - now) if self.active else self.pot

    def set_potential(self, potential, now):
        self.version += 1
        if self.has_root or potential <= TOL:
            self.active = False
            self.pot = max(potential, 0.0)
            self.death = INF
        else:
            self.active = True
            self.pot = potential
            self.death = now + potential


@dataclass
class GrowResult:
    bought: list[tuple[int, float]]
    mark_times: dict[int, float]
    dual_growth: float
    loads: list[float]
    end_time: float
    events: int
    min_potential: float
    trace: list[dict] = field(default_factory=list)


class _Grower:
    def __init__(self, inst: Instance, red: PenaltyReduction, trace: bool):
        self.inst = inst
        self.red = red
        self.tracing = trace
        self.trace = []
        n = inst.n
        self.now = 0.0
        self.sum_y = 0.0
        self.min_potential = INF
        self.moat_of = [None] * n
        self.moats: dict[int, _Moat] = {}
        self.next_id = 0
        self.load = [0.0] * n
        self.load_t = [0.0] * n
        self.rate = [0] * n
        self.vversion = [0] * n
        self.heap = []
        self.bought: list[tuple[int, float]] = []
        self.mark_times: dict[int, float] = {}
        self.active = 0
        self.events = 0

    # -- bookkeeping -------------------------------------------------------

    def _new_moat(self, members, boundary, unmarked, has_root, potential):
        m = _Moat(self.next_id, members, boundary, unmarked, has_root,
                  potential, self.now)
        self.next_id += 1
        self.moats[m.id] = m
        for v in members:
            self.moat_of[v] = m
        return m

    def _activated(self, m):
        if m.active:
            self.active += 1
            if m.death < INF:
                heapq.heappush(self.heap, (m.death, _MOAT, m.id, m.version))

    def _refresh(self, vertices):
        """Settle the load of each vertex and re-project its tight time."""
        now = self.now
        adj = self.inst.adj
        rc = self.red.reduced_cost
        for x in vertices:
            if self.moat_of[x] is not None:
                continue
            self.load[x] += self.rate[x] * (now - self.load_t[x])
            self.load_t[x] = now
            seen = set()
            r = 0
            for u in adj[x]:
                m = self.moat_of[u]
                if m is not None and m.id not in seen:
                    seen.add(m.id)
                    if m.active:
                        r += 1
            self.rate[x] = r
            self.vversion[x] += 1
            if r:
                t = now + max(rc[x] - self.load[x], 0.0) / r
                heapq.heappush(self.heap, (t, _VERTEX, x, self.vversion[x]))

    def _valid(self, entry):
        _, kind, key, version = entry
        if kind == _VERTEX:
            return self.moat_of[key] is None and self.vversion[key] == version
        m = self.moats.get(key)
        return m is not None and m.active and m.version == version

    def _log(self, kind, nodes, potentials):
        if self.tracing:
            self.trace.append({"t": self.now, "kind": kind,
                               "nodes": sorted(nodes), "potentials": potentials})

    # -- phases ------------------------------------------------------------

    def start(self):
        inst, red = self.inst, self.red
        initial = [v for v in range(inst.n) if v == inst.root or red.is_terminal[v]]
        bought = set(initial)
        seen = set()
        for s in initial:
            if s in seen:
                continue
            comp = reachable(inst, s, bought)
            seen |= comp
            members = sorted(comp)
            boundary = set()
            for u in members:
                boundary.update(x for x in inst.adj[u] if x not in bought)
            unmarked = [u for u in members if red.is_terminal[u]]
            potential = sum(red.reduced_penalty[u] for u in members)
            m = self._new_moat(members, boundary, unmarked, inst.root in comp,
                               potential)
            self._log("start", members, {"after": potential})
            self._activated(m)
        for v in initial:
            self.bought.append((v, 0.0))
        frontier = set()
        for m in self.moats.values():
            frontier |= m.boundary
        self._refresh(sorted(frontier))

    def _advance(self, t):
        if t > self.now:
            self.sum_y += self.active * (t - self.now)
            self.now = t

    def _next_event(self):
        heap = self.heap
        while heap and not self._valid(heap[0]):
            heapq.heappop(heap)
        if not heap:
            return None
        t0 = heap[0][0]
        window = t0 + TOL * max(1.0, abs(t0))
        batch = []
        while heap and heap[0][0] <= window:
            e = heapq.heappop(heap)
            if self._valid(e):
                batch.append(e)
        batch.sort(key=lambda e: (e[1], e[2], e[0]))
        chosen = batch[0]
        for e in batch[1:]:
            heapq.heappush(heap, e)
        return t0, chosen

    def run(self):
        limit = 4 * self.inst.n ** 2 + 16
        while self.active:
            nxt = self._next_event()
            if nxt is None:
                raise GuessRejected("active moats can never reach the root")
            t0, (_, kind, key, _) = nxt
            self._advance(t0)
            self.events += 1
            if self.events > limit:
                raise InvariantViolation("moat growth exceeded its event bound")
            if kind == _VERTEX:
                self._buy(key)
            else:
                self._deactivate(self.moats[key])

    def _buy(self, v):
        inst, red = self.inst, self.red
        now = self.now
        self.load[v] += self.rate[v] * (now - self.load_t[v])
        self.load_t[v] = now
        self.rate[v] = 0
        if self.load[v] > red.reduced_cost[v] + TOL * max(1.0, red.reduced_cost[v]):
            raise InvariantViolation(f"vertex {v} overloaded before buying")
        self.load[v] = red.reduced_cost[v]
        parts = {}
        for u in inst.adj[v]:
            m = self.moat_of[u]
            if m is not None:
                parts[m.id] = m
        parts = sorted(parts.values(), key=lambda m: -len(m.members))
        potential = 0.0
        before = {}
        for m in parts:
            pot = m.potential(now)
            self.min_potential = min(self.min_potential, pot)
            before[m.id] = pot
            potential += pot
            if m.active:
                self.active -= 1
        base = parts[0]
        members, boundary, unmarked = base.members, base.boundary, base.unmarked
        for m in parts[1:]:
            members.extend(m.members)
            boundary |= m.boundary
            unmarked.extend(m.unmarked)
            del self.moats[m.id]
        del self.moats[base.id]
        members.append(v)
        boundary.update(x for x in inst.adj[v] if self.moat_of[x] is None)
        boundary.discard(v)
        has_root = any(m.has_root for m in parts)
        merged = self._new_moat(members, boundary, unmarked, has_root, potential)
        self.bought.append((v, now))
        self._log("buy", [v], {})
        self._log("merge", merged.members,
                  {"before": before, "after": merged.potential(now)})
        if not merged.active and not has_root:
            self._mark(merged)
        self._activated(merged)
        self._refresh(sorted(boundary))

    def _deactivate(self, m):
        now = self.now
        pot = m.death - now
        self.min_potential = min(self.min_potential, pot)
        m.active = False
        m.pot = 0.0
        m.death = INF
        m.version += 1
        self.active -= 1
        self._mark(m)
        self._log("deactivate", m.members, {"after": 0.0})
        self._refresh(sorted(m.boundary))

    def _mark(self, m):
        for u in m.unmarked:
            self.mark_times.setdefault(u, self.now)
        m.unmarked = []

    def result(self):
        now = self.now
        for x in range(self.inst.n):
            if self.moat_of[x] is None:
                self.load[x] += self.rate[x] * (now - self.load_t[x])
                self.load_t[x] = now
        return GrowResult(self.bought, self.mark_times, self.sum_y,
                          list(self.load), now, self.events, self.min_potential,
                          self.trace)


def grow_phase(inst: Instance, red: PenaltyReduction, trace: bool = False) -> GrowResult:
    g = _Grower(inst, red, trace)
    g.start()
    g.run()
    return g.result()


def prune_phase(inst: Instance, bought, mark_times, terminals) -> Solution:
    """Reverse-delete over the bought vertices.

    A vertex bought at time t goes if removing it keeps every terminal that
    is unmarked, or marked after t, in the root's component.
    """
    root = inst.root
    bought = list(bought)
    current = reachable(inst, root, {v for v, _ in bought} | {root})

    def required(u, t):
        if u not in terminals:
            return False
        mark = mark_times.get(u)
        return mark is None or mark > t + TOL * max(1.0, t)

    for v, t in reversed(bought):
        if v == root or v not in current:
            continue
        if required(v, t):
            continue
        rest = current - {v}
        kept = reachable(inst, root, rest)
        if any(required(u, t) for u in rest - kept):
            continue
        current = kept
    return Solution.of(inst, current)


@dataclass
class MoatRunResult:
    tree: Solution
    dual_value: float
    lam: float
    bought_order: list[tuple[int, float]]
    mark_times: dict[int, float]
    reduction: PenaltyReduction
    dual_growth: float
    loads: list[float]
    min_potential: float
    events: int
    trace: list[dict]

    def lagrangian_penalty(self, inst: Instance) -> float:
        """``lam`` times the profit left outside the tree."""
        return self.lam * (inst.total_profit - self.tree.profit)

    def lmp_gap(self, inst: Instance, factor: float = 3.0) -> float:
        """``factor * DS - (c(T) + factor * lam * outside profit)``; >= 0 when
        the LMP inequality holds."""
        return factor * self.dual_value - (self.tree.cost + factor * self.lagrangian_penalty(inst))

    def max_dual_excess(self, inst: Instance) -> float:
        """Largest ``load_v + p_v - cost_v`` over non-root vertices."""
        red = self.reduction
        return max((self.loads[v] + red.p[v] - inst.weights[v]
                    for v in range(inst.n) if v != inst.root), default=0.0)


def run_pcst(inst: Instance, W, lam: float, trace: bool = False) -> MoatRunResult:
    W = frozenset(W)
    if not W <= reachable(inst, inst.root):
        raise GuessRejected("skeleton vertex unreachable from the root")
    red = reduce_penalties(inst, W, lam)
    grown = grow_phase(inst, red, trace=trace)
    tree = prune_phase(inst, grown.bought, grown.mark_times, red.terminals)
    sum_p = sum(red.p[v] for v in range(inst.n) if v != inst.root)
    return MoatRunResult(tree=tree, dual_value=grown.dual_growth + sum_p, lam=lam,
                         bought_order=grown.bought, mark_times=grown.mark_times,
                         reduction=red, dual_growth=grown.dual_growth,
                         loads=grown.loads, min_potential=grown.min_potential,
                         events=grown.events, trace=grown.trace)
