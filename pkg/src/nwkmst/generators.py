"""Instance generators: seeded grids, partial-cover reductions and the
A/B/O lower-bound family with its handicap extension."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import InfeasibleError
from .instance import TOL, Instance

COST_DISTRIBUTIONS = ("unit", "uniform", "integer")


def _draw(rng: random.Random, dist: str) -> float:
    if dist == "unit":
        return 1.0
    if dist == "uniform":
        return round(rng.uniform(0.0, 1.0), 6)
    if dist == "integer":
        return float(rng.randint(1, 10))
    raise ValueError(f"unknown cost distribution {dist!r}; pick one of {COST_DISTRIBUTIONS}")


def gen_planar_grid(rows: int, cols: int, cost_distribution: str = "uniform",
                    seed: int = 0, quota: int | None = None) -> Instance:
    """rows x cols grid rooted at the corner (vertex 0), unit profits.

    ``quota`` defaults to half the vertices, rounded up.
    """
    n = rows * cols
    if rows < 1 or cols < 1 or n < 2:
        raise ValueError("grid needs at least two vertices")
    rng = random.Random(seed)
    cost = [0.0] + [_draw(rng, cost_distribution) for _ in range(n - 1)]
    edges = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j
            if j + 1 < cols:
                edges.append((v, v + 1))
            if i + 1 < rows:
                edges.append((v, v + cols))
    if quota is None:
        quota = math.ceil(n / 2)
    return Instance.build(n, 0, quota, cost, [1] * n, edges)


def reduce_partial_cover(sets, n_elements: int, coverage_target: int) -> Instance:
    """Three-layer quota instance of a partial cover problem.

    Vertex 0 is the root, vertices ``1..m`` are the sets (given cost, no
    profit) and ``m+1..m+n_elements`` the elements (no cost, profit 1).
    """
    m = len(sets)
    covered = set()
    edges = []
    for s, (_, elems) in enumerate(sets):
        edges.append((0, 1 + s))
        for e in elems:
            if not 0 <= e < n_elements:
                raise ValueError(f"set {s} covers out-of-range element {e}")
            covered.add(e)
            edges.append((1 + s, 1 + m + e))
    if coverage_target > len(covered):
        raise InfeasibleError(
            f"only {len(covered)} of {n_elements} elements are coverable, "
            f"target is {coverage_target}")
    cost = [0.0] + [float(c) for c, _ in sets] + [0.0] * n_elements
    profit = [0] * (1 + m) + [1] * n_elements
    return Instance.build(1 + m + n_elements, 0, coverage_target, cost, profit, edges)


@dataclass(frozen=True)
class MestreParams:
    q: int
    r: float = 3.0

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be at least 2")


@dataclass(frozen=True)
class GadgetParams:
    q: int
    gamma: int | None = None
    eps_perturb: float = TOL * 1e3

    def __post_init__(self):
        if self.q % 2:
            raise ValueError("the handicap gadget needs an even q")
        if self.gamma is not None and self.gamma < 1:
            raise ValueError("gamma must be at least 1")
        if not self.eps_perturb > 0:
            raise ValueError("eps_perturb must be positive")

    @property
    def pendants(self) -> int:
        return self.q ** 3 if self.gamma is None else self.gamma


@dataclass
class Layout:
    """Vertex ids of every family in a generated lower-bound instance."""

    A: list[int]
    B: list[int]
    O: list[int]
    elements: list[int]
    crosses: list[int]
    grid: list[int] = field(default_factory=list)
    pendants: list[int] = field(default_factory=list)

    @property
    def high_potential(self) -> list[int]:
        cross = set(self.crosses)
        return [e for e in self.elements if e not in cross] + self.grid


def mestre_sets(p: MestreParams):
    """Set system with cells (row i, column j), q elements per cell.

    Element ``(i*q + j)*q + e`` is the e-th element of cell (i, j); the 2q
    elements past the grid are the two extras of each row set, the first of
    which is also covered by the matching O set.
    """
    q = p.q
    base = q ** 3

    def el(i, j, e):
        return (i * q + j) * q + e

    def extra(i, t):
        return base + 2 * i + t

    sets = []
    for j in range(q):
        sets.append((2 / 3 * p.r / q, [el(i, j, e) for i in range(q) for e in range(q)]))
    for i in range(q):
        sets.append((4 / 3 * p.r / q,
                     [el(i, j, e) for j in range(q) for e in range(q)]
                     + [extra(i, 0), extra(i, 1)]))
    for e in range(q):
        sets.append((1 / q, [el(i, j, e) for i in range(q) for j in range(q)]
                     + [extra(e, 0)]))
    return sets, base + 2 * q


def _mestre_layout(q: int) -> Layout:
    m = 3 * q
    A = list(range(1, 1 + q))
    B = list(range(1 + q, 1 + 2 * q))
    O = list(range(1 + 2 * q, 1 + m))
    n_el = q ** 3 + 2 * q
    elements = list(range(1 + m, 1 + m + n_el))
    crosses = elements[q ** 3:]
    return Layout(A, B, O, elements, crosses)


def mestre_instance(p: MestreParams) -> Instance:
    """Reduction of the A/B/O partial cover family; quota q^3 + q."""
    sets, n_el = mestre_sets(p)
    return reduce_partial_cover(sets, n_el, p.q ** 3 + p.q)


def mestre_layout(p: MestreParams) -> Layout:
    return _mestre_layout(p.q)


def handicap_instance(m: MestreParams, g: GadgetParams) -> Instance:
    return handicap_with_layout(m, g)[0]


def handicap_with_layout(m: MestreParams, g: GadgetParams) -> tuple[Instance, Layout]:
    """The A/B/O instance plus the handicap grid and pendant aggregation.

    The gadget is a q-column, q^2-row grid of non-adjacent vertices; B sets
    see all of it, A_i sees columns i..i+q/2-1 (mod q), O_i sees column i.
    Every high-potential vertex gets ``gamma`` zero-cost pendants, and A
    costs drop by ``eps_perturb``.
    """
    if m.q != g.q:
        raise ValueError("MestreParams and GadgetParams disagree on q")
    q = m.q
    gamma = g.pendants
    base = mestre_instance(m)
    lay = _mestre_layout(q)
    cost = list(base.cost)
    profit = list(base.profit)
    edges = list(base.edges())
    gap = min(abs(a - b) for a in set(cost[1:1 + 3 * q]) for b in set(cost[1:1 + 3 * q])
              if a != b)
    if g.eps_perturb >= gap:
        raise ValueError("eps_perturb must stay below the smallest set-cost gap")
    for a in lay.A:
        cost[a] -= g.eps_perturb

    nxt = base.n
    grid = {}
    for row in range(q * q):
        for col in range(q):
            grid[row, col] = nxt
            nxt += 1
    cost += [0.0] * len(grid)
    profit += [1] * len(grid)
    for (row, col), v in grid.items():
        for b in lay.B:
            edges.append((b, v))
        for i, a in enumerate(lay.A):
            if (col - i) % q < q // 2:
                edges.append((a, v))
        edges.append((lay.O[col], v))
    lay.grid = sorted(grid.values())

    for h in lay.high_potential:
        for _ in range(gamma):
            edges.append((h, nxt))
            lay.pendants.append(nxt)
            nxt += 1
    cost += [0.0] * len(lay.pendants)
    profit += [1] * len(lay.pendants)
    quota = 2 * q ** 3 * gamma + q
    return Instance.build(nxt, 0, quota, cost, profit, edges), lay
