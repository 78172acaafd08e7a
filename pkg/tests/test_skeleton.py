import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import path_instance, random_connected, star_instance
from nwkmst.errors import GuessRejected
from nwkmst.generators import MestreParams, mestre_instance, mestre_layout
from nwkmst.instance import Instance, Solution, distances_to_set
from nwkmst.oracle import brute_force_quota_tree
from nwkmst.skeleton import (SkeletonGuess, decompose_skeleton, enumerate_guesses,
                             is_eps_distant, opt_ladder, prune_instance,
                             tree_edges_instance)


def test_guess_validation():
    with pytest.raises(ValueError):
        SkeletonGuess(frozenset(), 1.0, 0.0)
    with pytest.raises(ValueError):
        SkeletonGuess(frozenset(), 0.0, 0.5)
    assert SkeletonGuess(frozenset(), 4.0, 0.5).budget == 2.0


def test_eps_distant_examples():
    inst = path_instance([0, 5, 1])
    assert is_eps_distant(inst, 1, {1}, 0.0)
    assert not is_eps_distant(inst, 2, {0}, 5)
    assert is_eps_distant(inst, 2, {0}, 6)


def test_eps_distant_unreachable_is_false():
    inst = Instance.build(3, 0, 1, [0, 1, 1], [1] * 3, [(0, 1)])
    assert not is_eps_distant(inst, 2, {0}, 100)


def test_prune_identity_when_w_is_everything():
    inst = random_connected(random.Random(4), 9)
    pruned = prune_instance(inst, SkeletonGuess(frozenset(range(9)), 1.0, 0.5))
    assert pruned.instance.n == 9
    assert pruned.instance.origin == tuple(range(9))


def test_prune_star_drops_expensive_leaf():
    inst = star_instance(0, [1, 100])
    pruned = prune_instance(inst, SkeletonGuess(frozenset(), 10.0, 0.5))
    assert set(pruned.instance.origin) == {0, 1}


def test_prune_rejects_disconnected_skeleton():
    inst = path_instance([0, 100, 1])
    with pytest.raises(GuessRejected):
        prune_instance(inst, SkeletonGuess(frozenset({2}), 10.0, 0.5))


def test_prune_mestre_with_o_vertex():
    p = MestreParams(2)
    inst, lay = mestre_instance(p), mestre_layout(p)
    guess = SkeletonGuess(frozenset({lay.O[0]}), 1.0, 0.5)
    pruned = prune_instance(inst, guess)
    expected = {v for v in range(inst.n)
                if is_eps_distant(inst, v, {lay.O[0], inst.root}, guess.budget)}
    assert set(pruned.instance.origin) == expected | {0}
    # only the B-exclusive extras sit behind a set costlier than the budget
    b_only = set(lay.crosses[1::2])
    assert set(lay.elements) - expected == b_only


def test_enumerate_counts():
    inst = path_instance([0, 1, 2, 3])
    ladder = opt_ladder(inst, 0.5)
    assert {g.W for g in enumerate_guesses(inst, 0.5, 0)} == {frozenset()}
    guesses = list(enumerate_guesses(inst, 0.5, 1))
    assert len({g.W for g in guesses}) == 5
    assert len(guesses) == 5 * len(ladder)
    assert max(len(g.W) for g in enumerate_guesses(path_instance([0, 1, 1]), 1.0, 5)) == 1


def test_opt_ladder_covers_range():
    inst = path_instance([0, 0.5, 2, 7])
    ladder = opt_ladder(inst, 0.25)
    assert ladder[0] == 0.5
    assert ladder[-1] >= 9.5 * (1 - 1e-9)
    assert all(b == pytest.approx(a * 1.25) for a, b in zip(ladder, ladder[1:]))
    assert opt_ladder(path_instance([0, 0, 0]), 0.5) == [1e-9]


def test_decompose_trivial_tree():
    inst = path_instance([0, 1])
    assert decompose_skeleton(inst, Solution.of(inst, {0}), 0.5, 1.0) == frozenset()


def _check_decomposition(inst, tree, eps, opt):
    W = decompose_skeleton(inst, tree, eps, opt)
    assert W <= tree.vertices - {inst.root}
    assert len(W) <= math.ceil(1 / eps - 1e-9)
    along = tree_edges_instance(inst, tree)
    dist = distances_to_set(along, set(W) | {inst.root})
    for v in tree.vertices:
        assert dist[v] <= eps * opt + 1e-9, (v, dist[v])
    return W


def test_decompose_unit_path():
    inst = path_instance([0] + [1] * 10)
    tree = Solution.of(inst, range(11))
    W = _check_decomposition(inst, tree, 0.3, 10)
    assert len(W) <= 4


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10 ** 6))
def test_decompose_whole_tree_budget(n, seed):
    inst = random_connected(random.Random(seed), n, extra=0)
    tree = Solution.of(inst, range(n))
    assert len(_check_decomposition(inst, tree, 1.0, max(tree.cost, 1e-9))) <= 1


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 60), st.integers(0, 10 ** 6), st.sampled_from([0.1, 0.3, 0.5, 1.0]))
def test_decompose_lemma_bounds(n, seed, eps):
    rng = random.Random(seed)
    inst = random_connected(rng, n, extra=0.5)
    keep = {0}
    frontier = [0]
    while frontier and len(keep) < rng.randint(1, n):
        u = frontier.pop(rng.randrange(len(frontier)))
        for v in inst.adj[u]:
            if v not in keep and rng.random() < 0.7:
                keep.add(v)
                frontier.append(v)
    tree = Solution.of(inst, keep)
    _check_decomposition(inst, tree, eps, max(tree.cost, 1e-9))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 25), st.integers(0, 10 ** 6))
def test_prune_is_idempotent(n, seed):
    rng = random.Random(seed)
    inst = random_connected(rng, n, extra=0.8)
    W = frozenset(rng.sample(range(n), rng.randint(0, 2)))
    guess = SkeletonGuess(W, rng.uniform(0.5, 10), rng.choice([0.25, 0.5, 1.0]))
    try:
        once = prune_instance(inst, guess)
    except GuessRejected:
        return
    again = prune_instance(once.instance, SkeletonGuess(once.W, guess.opt_guess, guess.epsilon))
    assert again.instance.origin == once.instance.origin


@pytest.mark.parametrize("seed", range(8))
def test_some_guess_survives_with_optimal_skeleton(seed):
    rng = random.Random(seed)
    inst = random_connected(rng, rng.randint(6, 12), extra=0.6)
    eps = 0.5
    opt = brute_force_quota_tree(inst)
    if opt.opt_cost <= 0:
        return
    hits = 0
    for guess in enumerate_guesses(inst, eps, 2):
        if not opt.opt_cost <= guess.opt_guess <= (1 + eps) * opt.opt_cost * (1 + 1e-9):
            continue
        W = decompose_skeleton(inst, opt.opt_solution, eps, guess.opt_guess)
        if guess.W != W:
            continue
        pruned = prune_instance(inst, guess)
        assert opt.opt_solution.vertices <= set(pruned.instance.origin)
        hits += 1
    assert hits >= 1
