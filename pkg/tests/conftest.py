import pytest

from nwkmst.instance import Instance


def path_instance(costs, profits=None, quota=1, root=0):
    n = len(costs)
    profits = profits or [1] * n
    return Instance.build(n, root, quota, costs, profits, [(i, i + 1) for i in range(n - 1)])


def star_instance(center_cost, leaf_costs, quota=1):
    n = 1 + len(leaf_costs)
    return Instance.build(n, 0, quota, [center_cost, *leaf_costs], [1] * n,
                          [(0, i) for i in range(1, n)])


def random_connected(rng, n, extra=0.3, max_cost=5.0, max_profit=1):
    """Random spanning tree plus extra edges; root 0."""
    edges = set()
    for v in range(1, n):
        edges.add((rng.randrange(v), v))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra / n:
                edges.add((u, v))
    cost = [round(rng.uniform(0, max_cost), 3) for _ in range(n)]
    profit = [rng.randint(1, max_profit) for _ in range(n)]
    quota = rng.randint(1, sum(profit))
    return Instance.build(n, 0, quota, cost, profit, sorted(edges))


@pytest.fixture
def path_rab():
    return path_instance([0, 1, 2], quota=2)
