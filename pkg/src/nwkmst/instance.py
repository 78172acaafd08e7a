"""Node-weighted graph instances, solutions and basic graph primitives.

Vertices are dense integers ``0..n-1``.  The root's cost is never charged:
every cost computation goes through :attr:`Instance.weights`, which holds the
declared costs with the root entry forced to zero.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InfeasibleError, InstanceError, UnreachableError

#: Global comparison tolerance for weights.
TOL = 1e-9


@dataclass(frozen=True)
class Instance:
    """Immutable quota Steiner tree instance.

    ``origin[v]`` is the id of ``v`` in the instance this one was cut from
    (identity for freshly loaded instances).
    """

    n: int
    root: int
    quota: int
    cost: tuple[float, ...]
    profit: tuple[int, ...]
    adj: tuple[tuple[int, ...], ...]
    origin: tuple[int, ...] = ()
    weights: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.origin:
            object.__setattr__(self, "origin", tuple(range(self.n)))
        w = list(self.cost)
        if 0 <= self.root < self.n:
            w[self.root] = 0.0
        object.__setattr__(self, "weights", tuple(w))

    @classmethod
    def build(cls, n, root, quota, cost, profit, edges, *, validate=True):
        """Construct from an edge list; edges are symmetrized and sorted."""
        nbrs = [set() for _ in range(n)]
        for idx, (u, v) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"edge ({u}, {v}) out of range",
                                    field=f"edges[{idx}]")
            if u == v:
                raise InstanceError(f"self-loop on {u}", field=f"edges[{idx}]")
            nbrs[u].add(v)
            nbrs[v].add(u)
        inst = cls(n=n, root=root, quota=quota,
                   cost=tuple(float(c) for c in cost),
                   profit=tuple(int(p) for p in profit),
                   adj=tuple(tuple(sorted(s)) for s in nbrs))
        if validate:
            inst.validate()
        return inst

    def validate(self):
        if self.n < 1:
            raise InstanceError("instance needs at least one vertex", field="n")
        if not 0 <= self.root < self.n:
            raise InstanceError(f"root {self.root} out of range", field="root")
        if len(self.cost) != self.n or len(self.profit) != self.n:
            raise InstanceError("cost/profit length differs from n", field="nodes")
        for v, c in enumerate(self.cost):
            if not c >= 0:
                raise InstanceError(f"negative cost {c} on node {v}",
                                    field=f"nodes[{v}].cost")
        for v, p in enumerate(self.profit):
            if p < 0:
                raise InstanceError(f"negative profit {p} on node {v}",
                                    field=f"nodes[{v}].profit")
        for u, row in enumerate(self.adj):
            for v in row:
                if v == u:
                    raise InstanceError(f"self-loop on {u}", field="edges")
                if u not in self.adj[v]:
                    raise InstanceError(f"asymmetric adjacency {u}->{v}",
                                        field="edges")
            if len(set(row)) != len(row):
                raise InstanceError(f"parallel edges at {u}", field="edges")
        if self.quota < 0:
            raise InstanceError("quota must be non-negative", field="quota")
        total = sum(self.profit)
        if self.quota > total:
            raise InfeasibleError(
                f"quota {self.quota} exceeds total profit {total}")

    @property
    def total_profit(self) -> int:
        return sum(self.profit)

    @property
    def max_cost(self) -> float:
        return max(self.weights)

    def edges(self):
        """Yield each undirected edge once as ``(u, v)`` with ``u < v``."""
        for u, row in enumerate(self.adj):
            for v in row:
                if u < v:
                    yield u, v

    def cost_of(self, vertices: Iterable[int]) -> float:
        w = self.weights
        return sum(w[v] for v in vertices)

    def profit_of(self, vertices: Iterable[int]) -> int:
        p = self.profit
        return sum(p[v] for v in vertices)

    def induced(self, keep: Iterable[int]) -> tuple["Instance", dict[int, int]]:
        """Sub-instance induced on ``keep`` (must contain the root).

        Returns the sub-instance and the map from this instance's ids to the
        new ids.  ``origin`` of the result points at the *original* ids.
        """
        keep = sorted(set(keep))
        if self.root not in keep:
            raise InstanceError("induced sub-instance must keep the root")
        remap = {v: i for i, v in enumerate(keep)}
        adj = tuple(tuple(remap[u] for u in self.adj[v] if u in remap)
                    for v in keep)
        sub = Instance(n=len(keep), root=remap[self.root], quota=self.quota,
                       cost=tuple(self.cost[v] for v in keep),
                       profit=tuple(self.profit[v] for v in keep),
                       adj=adj,
                       origin=tuple(self.origin[v] for v in keep))
        return sub, remap

    def to_original(self, vertices: Iterable[int]) -> frozenset[int]:
        return frozenset(self.origin[v] for v in vertices)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "root": self.root,
            "quota": self.quota,
            "nodes": [{"id": v, "cost": self.cost[v], "profit": self.profit[v]}
                      for v in range(self.n)],
            "edges": [[u, v] for u, v in self.edges()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


def load_instance(text: str) -> Instance:
    """Parse and validate an instance in the JSON interchange format."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise InstanceError("top-level value must be an object")
    for key in ("n", "root", "quota", "nodes", "edges"):
        if key not in data:
            raise InstanceError("missing key", field=key)
    n = _as_int(data["n"], "n")
    root = _as_int(data["root"], "root")
    quota = _as_int(data["quota"], "quota")
    nodes = data["nodes"]
    if not isinstance(nodes, list) or len(nodes) != n:
        raise InstanceError(f"expected {n} node records", field="nodes")
    cost = [0.0] * n
    profit = [0] * n
    seen = set()
    for i, rec in enumerate(nodes):
        if not isinstance(rec, dict):
            raise InstanceError("node record must be an object", field=f"nodes[{i}]")
        try:
            v = _as_int(rec["id"], f"nodes[{i}].id")
            c = rec["cost"]
            p = _as_int(rec["profit"], f"nodes[{i}].profit")
        except KeyError as exc:
            raise InstanceError("missing key", field=f"nodes[{i}].{exc.args[0]}") from None
        if not 0 <= v < n or v in seen:
            raise InstanceError(f"bad or duplicate node id {v}", field=f"nodes[{i}].id")
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise InstanceError("cost must be a number", field=f"nodes[{i}].cost")
        seen.add(v)
        cost[v] = float(c)
        profit[v] = p
    edges = data["edges"]
    if not isinstance(edges, list):
        raise InstanceError("edges must be a list", field="edges")
    pairs = []
    for i, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2):
            raise InstanceError("edge must be a pair", field=f"edges[{i}]")
        pairs.append((_as_int(e[0], f"edges[{i}][0]"), _as_int(e[1], f"edges[{i}][1]")))
    return Instance.build(n, root, quota, cost, profit, pairs)


def _as_int(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError("expected an integer", field=name)
    return value


@dataclass(frozen=True)
class Solution:
    """A connected vertex set containing the root."""

    vertices: frozenset[int]
    cost: float
    profit: int

    @classmethod
    def of(cls, inst: Instance, vertices: Iterable[int]) -> "Solution":
        vs = frozenset(vertices)
        return cls(vs, inst.cost_of(vs), inst.profit_of(vs))

    def __len__(self):
        return len(self.vertices)

    def is_valid(self, inst: Instance) -> bool:
        return (inst.root in self.vertices
                and is_connected(inst, self.vertices)
                and abs(self.cost - inst.cost_of(self.vertices)) <= TOL * max(1, inst.n)
                and self.profit == inst.profit_of(self.vertices))

    def is_feasible(self, inst: Instance) -> bool:
        return self.is_valid(inst) and self.profit >= inst.quota


def neighborhood(inst: Instance, S: Iterable[int]) -> set[int]:
    """Vertices outside ``S`` with at least one neighbour in ``S``."""
    S = set(S)
    out = set()
    for u in S:
        out.update(inst.adj[u])
    return out - S


def components(inst: Instance, S: Iterable[int]) -> list[set[int]]:
    """Connected components of the subgraph induced on ``S``."""
    S = set(S)
    seen = set()
    comps = []
    for s in sorted(S):
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in inst.adj[u]:
                if v in S and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        comps.append(comp)
    return comps


def reachable(inst: Instance, source: int, allowed: Iterable[int] | None = None) -> set[int]:
    """Vertices reachable from ``source`` inside ``allowed`` (default: all)."""
    allowed = None if allowed is None else set(allowed)
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in inst.adj[u]:
            if v not in seen and (allowed is None or v in allowed):
                seen.add(v)
                queue.append(v)
    return seen


def is_connected(inst: Instance, S: Iterable[int]) -> bool:
    S = set(S)
    if not S:
        return False
    return len(reachable(inst, next(iter(S)), S)) == len(S)


def node_weighted_shortest_path(inst: Instance, source: int, targets: Iterable[int],
                                weights: Sequence[float] | None = None):
    """Cheapest path from ``source`` to any target.

    The path cost counts every path vertex except the target that is reached.
    Among equal-cost paths the lexicographically smallest vertex sequence wins.
    Raises :class:`UnreachableError` if no target can be reached.
    """
    targets = set(targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    if source in targets:
        return [source], 0.0
    w = inst.weights if weights is None else weights
    best = {source: 0.0}
    heap = [(0.0, (source,))]
    done = set()
    while heap:
        d, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u in targets:
            return list(path), d
        nd = d + w[u]
        for v in inst.adj[u]:
            if v in done:
                continue
            if nd < best.get(v, float("inf")) + TOL:
                best[v] = min(nd, best.get(v, nd))
                heapq.heappush(heap, (nd, path + (v,)))
    raise UnreachableError(f"no path from {source} to {sorted(targets)}")


def distances_to_set(inst: Instance, U: Iterable[int],
                     allowed: Iterable[int] | None = None) -> list[float]:
    """For every vertex v, the node weight of the cheapest path from v to U.

    Same cost convention as :func:`node_weighted_shortest_path` (the reached
    vertex of ``U`` is free, ``v`` itself is paid).  Unreachable vertices get
    ``inf``.  ``allowed`` restricts the paths to a vertex subset.
    """
    allowed = None if allowed is None else set(allowed)
    w = inst.weights
    dist = [float("inf")] * inst.n
    heap = []
    for u in U:
        dist[u] = 0.0
        heap.append((0.0, u))
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v in inst.adj[u]:
            if allowed is not None and v not in allowed:
                continue
            nd = d + w[v]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist
