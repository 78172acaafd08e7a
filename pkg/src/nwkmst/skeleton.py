"""Skeleton guessing and instance pruning.

A skeleton is a small vertex set W of an optimum tree such that every
optimum vertex can reach W + root through a path of node weight at most
``epsilon * OPT``.  The solver guesses (W, OPT) pairs and discards every
vertex that is farther than that budget from W + root.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

from .errors import GuessRejected, UnreachableError
from .instance import (TOL, Instance, Solution, distances_to_set,
                       node_weighted_shortest_path, reachable)


@dataclass(frozen=True)
class SkeletonGuess:
    W: frozenset[int]
    opt_guess: float
    epsilon: float

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not self.opt_guess > 0:
            raise ValueError("opt_guess must be positive")

    @property
    def budget(self) -> float:
        return self.epsilon * self.opt_guess


@dataclass(frozen=True)
class PrunedInstance:
    """Result of pruning: the sub-instance and the guess in its ids."""

    instance: Instance
    W: frozenset[int]
    remap: dict[int, int]


def is_eps_distant(inst: Instance, v: int, U, budget: float) -> bool:
    try:
        _, cost = node_weighted_shortest_path(inst, v, U)
    except UnreachableError:
        return False
    return cost <= budget + TOL


def prune_instance(inst: Instance, guess: SkeletonGuess) -> PrunedInstance:
    """Keep the root plus every vertex within the guess budget of W + root.

    Raises :class:`GuessRejected` if some skeleton vertex ends up outside the
    root's component, or the kept vertices cannot reach the quota.
    """
    anchors = set(guess.W) | {inst.root}
    dist = distances_to_set(inst, anchors)
    limit = guess.budget + TOL
    keep = {v for v in range(inst.n) if dist[v] <= limit} | anchors
    sub, remap = inst.induced(keep)
    W = frozenset(remap[w] for w in guess.W)
    rooted = reachable(sub, sub.root)
    if not W <= rooted:
        raise GuessRejected("skeleton vertex disconnected from the root after pruning")
    if sub.profit_of(rooted) < sub.quota:
        raise GuessRejected("pruned instance cannot reach the quota")
    return PrunedInstance(sub, W, remap)


def opt_ladder(inst: Instance, epsilon: float) -> list[float]:
    """Powers of (1 + epsilon) covering [min nonzero cost, total cost]."""
    nonzero = [c for c in inst.weights if c > 0]
    lo = min(nonzero) if nonzero else TOL
    hi = max(sum(inst.weights), lo)
    ladder = [lo]
    while ladder[-1] < hi * (1 - TOL):
        ladder.append(ladder[-1] * (1 + epsilon))
    return ladder


def skeleton_cap(epsilon: float, max_skeleton: int) -> int:
    return min(math.ceil(1 / epsilon - TOL), max_skeleton)


def enumerate_guesses(inst: Instance, epsilon: float,
                      max_skeleton: int) -> Iterator[SkeletonGuess]:
    """Every (W, opt_guess) with \\|W\\| <= min(ceil(1/eps), max_skeleton).

    Skeleton sets are drawn from all vertices (the root is allowed but
    redundant), smallest sets first.
    """
    if max_skeleton < 0:
        raise ValueError("max_skeleton must be non-negative")
    ladder = opt_ladder(inst, epsilon)
    cap = skeleton_cap(epsilon, max_skeleton)
    for size in range(cap + 1):
        for W in itertools.combinations(range(inst.n), size):
            W = frozenset(W)
            for opt in ladder:
                yield SkeletonGuess(W, opt, epsilon)


def _rooted_tree(inst: Instance, vertices):
    """BFS spanning tree of the induced subgraph, rooted at the root."""
    vertices = set(vertices)
    parent = {inst.root: None}
    order = [inst.root]
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for v in inst.adj[u]:
            if v in vertices and v not in parent:
                parent[v] = u
                order.append(v)
    if len(order) != len(vertices):
        raise ValueError("tree vertex set is not connected to the root")
    children = {v: [] for v in order}
    for v in order[1:]:
        children[parent[v]].append(v)
    return order, parent, children


def decompose_skeleton(inst: Instance, tree: Solution, epsilon: float,
                       opt: float) -> frozenset[int]:
    """Constructive skeleton of a tree via bottom-up good/bad subtrees.

    Works on a BFS spanning tree of ``tree``.  A subtree hanging from ``u``
    is bad once some remaining path ending in ``u`` (both ends counted) has
    weight above ``epsilon * opt``; then ``u`` joins W and its subtree is cut.
    """
    budget = epsilon * opt
    w = inst.weights
    order, parent, children = _rooted_tree(inst, tree.vertices)
    height = {}
    removed = set()
    W = set()
    for u in reversed(order):
        if u == inst.root:
            break
        below = [height[c] for c in children[u] if c not in removed]
        height[u] = w[u] + max(below, default=0.0)
        if height[u] > budget + TOL:
            W.add(u)
            removed.add(u)
    return frozenset(W)


def tree_edges_instance(inst: Instance, tree: Solution) -> Instance:
    """The instance restricted to the BFS spanning tree used by
    :func:`decompose_skeleton` (for distance checks along tree edges)."""
    order, parent, _ = _rooted_tree(inst, tree.vertices)
    edges = [(v, parent[v]) for v in order[1:]]
    return Instance.build(inst.n, inst.root, 0, inst.cost, inst.profit, edges,
                          validate=False)
