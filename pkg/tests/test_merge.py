import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import path_instance
from nwkmst.errors import InvariantViolation
from nwkmst.generators import gen_planar_grid
from nwkmst.instance import Instance, Solution, is_connected
from nwkmst.lagrangian import binary_search_lambda
from nwkmst.merge import (SUPER_ROOT, StarGraph, SuperNode, assemble_sol1,
                          choose_best, contract, levels_for, merge_checks,
                          pick_leaves, plan_merge, reduce_to_star)
from nwkmst.skeleton import opt_ladder


def test_contract_full_overlap_is_degenerate():
    inst = path_instance([0, 1, 1])
    t = Solution.of(inst, {0, 1, 2})
    ct = contract(inst, t, t)
    assert ct.degenerate and set(ct.adj) == {SUPER_ROOT}


def test_contract_root_only():
    inst = path_instance([0, 1, 2])
    ct = contract(inst, Solution.of(inst, {0}), Solution.of(inst, {0, 1, 2}))
    assert ct.adj == {SUPER_ROOT: [1], 1: [SUPER_ROOT, 2], 2: [1]}
    assert (ct.total_cost, ct.total_profit) == (3, 2)


def test_contract_absorbs_shared_skeleton():
    # r - w - x and r - y ; both trees hold w
    inst = Instance.build(4, 0, 1, [0, 2, 1, 1], [1] * 4, [(0, 1), (1, 2), (0, 3)])
    ct = contract(inst, Solution.of(inst, {0, 1, 3}), Solution.of(inst, {0, 1, 2}))
    assert set(ct.adj) == {SUPER_ROOT, 2}
    assert {0, 1} <= ct.shared


def test_cost_effectiveness_is_profit_weighted():
    inst = Instance.build(3, 0, 1, [0, 1, 3], [0, 1, 3], [(0, 1), (1, 2)])
    ct = contract(inst, Solution.of(inst, {0}), Solution.of(inst, {0, 1, 2}))
    assert ct.is_cost_effective(1, 1) and ct.is_cost_effective(3, 3)
    assert not ct.is_cost_effective(2, 1)


def _star_shape(star):
    return sorted(n.profit for n in star.leaves), star.center


def test_reduce_unit_path():
    inst = path_instance([0, 1, 1, 1])
    ct = contract(inst, Solution.of(inst, {0}), Solution.of(inst, range(4)))
    star = reduce_to_star(ct, 1)
    profits, _ = _star_shape(star)
    assert sum(profits) + (star.center.profit if star.center else 0) >= 1
    assert all(ct.is_cost_effective(n.cost, n.profit) for n in star.leaves)


def test_reduce_whole_graph_when_quota_is_large():
    inst = path_instance([0, 1, 1])
    ct = contract(inst, Solution.of(inst, {0}), Solution.of(inst, range(3)))
    star = reduce_to_star(ct, 2)
    assert sum(n.profit for n in star.nodes) == 2


def test_reduce_star_fixed_point():
    # hub h (cost 3) with three unit leaves; T1 = {r, h}
    inst = Instance.build(5, 0, 1, [0, 3, 1, 1, 1], [1] * 5,
                          [(0, 1), (1, 2), (1, 3), (1, 4)])
    ct = contract(inst, Solution.of(inst, {0}), Solution.of(inst, range(5)))
    star = reduce_to_star(ct, 3)
    assert star.center.members == (1,)
    assert sorted(n.key for n in star.leaves) == [2, 3, 4]


def test_reduce_rejects_nonpositive_quota():
    inst = path_instance([0, 1])
    ct = contract(inst, Solution.of(inst, {0}), Solution.of(inst, {0, 1}))
    with pytest.raises(ValueError):
        reduce_to_star(ct, 0)


def test_levels():
    assert levels_for(1.0) == 2
    assert levels_for(0.5) == 3
    assert levels_for(0.1) == 6


def _branchy():
    """Hub 1 hanging off the root with branches of 3, 3 and 2 unit vertices."""
    edges = [(0, 1)]
    branches = [[2, 3, 4], [5, 6, 7], [8, 9]]
    for b in branches:
        edges.append((1, b[0]))
        edges += [(u, v) for u, v in zip(b, b[1:])]
    cost = [0, 50] + [1] * 8
    inst = Instance.build(10, 0, 1, cost, [1] * 10, edges)
    ct = contract(inst, Solution.of(inst, {0}), Solution.of(inst, range(10)))
    leaves = [SuperNode(100 + i, tuple(b), float(len(b)), len(b)) for i, b in enumerate(branches)]
    star = StarGraph(SuperNode(1, (1,), 50.0, 1), leaves)
    return inst, ct, star


def test_pick_single_unit_leaf():
    inst, ct, _ = _branchy()
    star = StarGraph(None, [SuperNode(9, (9,), 1.0, 1), SuperNode(8, (8,), 1.0, 1)])
    plan = pick_leaves(ct, star, 1, 1.0)
    assert plan.picked == {8} and plan.levels_used == 1


def test_pick_recurses_into_overshooting_leaf():
    inst, ct, star = _branchy()
    plan = pick_leaves(ct, star, 5, 0.5)
    first = plan.levels[0]
    assert [n.key for n in first.taken] == [100]
    assert first.recursed.key == 101
    assert plan.levels[1].q == 2
    assert inst.profit_of(plan.picked) >= 5
    assert plan.picked <= set(range(2, 10))


def test_pick_last_level_takes_leaf_whole():
    inst, ct, star = _branchy()
    plan = pick_leaves(ct, star, 5, 1.0)
    assert plan.levels_used <= 2
    assert inst.profit_of(plan.picked) >= 5


def test_assemble_without_plan_returns_t1():
    inst = path_instance([0, 1])
    t1 = Solution.of(inst, {0})
    assert assemble_sol1(inst, t1, None, (), 1.0) == (t1, 0.0)


def test_assemble_connects_through_skeleton():
    # r - w - a - b with w forced: picking b needs the path b - a
    inst = path_instance([0, 1, 1, 1], quota=3)
    t1 = Solution.of(inst, {0, 1})
    t2 = Solution.of(inst, {0, 1, 2, 3})
    plan = plan_merge(inst, t1, t2, 1.0)
    sol1, extra = assemble_sol1(inst, t1, plan, {1}, 10.0)
    assert is_connected(inst, sol1.vertices) and sol1.profit >= 3
    assert extra == pytest.approx(inst.cost_of(sol1.vertices - t1.vertices - plan.picked))


def test_choose_best():
    inst = path_instance([0, 5, 7], quota=1)
    a, b = Solution.of(inst, {0, 1}), Solution.of(inst, {0, 1, 2})
    assert choose_best(inst, a, b) is a
    same = Solution.of(inst, {0, 1})
    assert choose_best(inst, a, same) is a
    with pytest.raises(InvariantViolation):
        choose_best(inst, Solution.of(inst, {0, 2}), b)


def _plans(seed, eps):
    rng = random.Random(seed)
    rows, cols = rng.randint(3, 8), rng.randint(3, 8)
    inst = gen_planar_grid(rows, cols, rng.choice(["uniform", "integer"]), seed,
                           rng.randint(2, rows * cols - 1))
    for g in opt_ladder(inst, eps)[::3]:
        res = binary_search_lambda(inst, (), eps, g)
        if res.pair is None:
            continue
        t1, t2 = res.pair.t1.tree, res.pair.t2.tree
        plan = plan_merge(inst, t1, t2, eps)
        sol1, _ = assemble_sol1(inst, t1, plan, (), float("inf"))
        yield inst, res.pair, plan, sol1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0.25, 0.5, 1.0]))
def test_merge_certificates(seed, eps):
    for inst, pair, plan, sol1 in _plans(seed, eps):
        chk = merge_checks(inst, plan, pair.alpha2, pair.t2.tree, eps, sol1)
        failed = [k for k, v in chk.items() if v is False]
        assert not failed, failed
        assert plan.picked <= pair.t2.tree.vertices - pair.t1.tree.vertices


def test_two_level_plan_on_grid():
    found = 0
    for seed in range(200):
        for inst, pair, plan, sol1 in _plans(seed, 0.5):
            if plan.levels_used < 2:
                continue
            chk = merge_checks(inst, plan, pair.alpha2, pair.t2.tree, 0.5, sol1)
            assert chk["sol1_connected"] and chk["cost_ok"] and chk["halving_ok"]
            found += 1
        if found >= 3:
            break
    assert found >= 1
