"""Ground-truth oracle: tree enumeration, pair search, the exact rational
simplex, and the budget-model adversaries."""

from __future__ import annotations

import random
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from recotree import (
    DEFAULT_CAPS,
    Graph,
    OracleCapExceeded,
    OracleCaps,
    Tree,
    UnboundedProgramError,
    adversary_value_cutting,
    adversary_value_full_lp,
    brute_force_recoverable,
    brute_force_robust,
    brute_force_robust_value,
    enumerate_spanning_trees,
    generate_instance,
    solve_interval,
    spanning_tree_count,
)
from recotree.oracle import enumerate_pairs, rational_simplex_max

from _util import instance_stream


def _complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def test_known_tree_counts():
    assert spanning_tree_count(_complete_graph(3)) == 3
    assert spanning_tree_count(_complete_graph(4)) == 16
    cycle5 = Graph(5, [(i, (i + 1) % 5) for i in range(5)])
    assert spanning_tree_count(cycle5) == 5
    assert len(list(enumerate_spanning_trees(_complete_graph(3)))) == 3
    assert len(list(enumerate_spanning_trees(_complete_graph(4)))) == 16
    assert len(list(enumerate_spanning_trees(cycle5))) == 5
    # Parallel edges are distinct trees.
    multi = Graph(2, [(0, 1), (0, 1), (0, 1)])
    assert spanning_tree_count(multi) == 3
    assert len(list(enumerate_spanning_trees(multi))) == 3


def test_enumeration_matches_matrix_count():
    rng = random.Random(61)
    for _ in range(50):
        n = rng.randint(2, 6)
        edges = [(rng.randrange(v), v) for v in range(1, n)]
        while len(edges) < n - 1 + rng.randint(0, 4):
            u, v = rng.randrange(n), rng.randrange(n)
            if u != v:
                edges.append((u, v))
        g = Graph(n, edges)
        trees = list(enumerate_spanning_trees(g))
        assert len(trees) == spanning_tree_count(g)
        assert len(set(trees)) == len(trees)  # no duplicates
        base = Tree(g, trees[0])  # every yield is a spanning tree
        assert base.edge_ids == trees[0]


def test_enumeration_cap_refusal():
    g = _complete_graph(8)  # 8^6 = 262144 trees
    with pytest.raises(OracleCapExceeded):
        list(enumerate_spanning_trees(g, OracleCaps(max_trees=1000)))
    with pytest.raises(OracleCapExceeded):
        brute_force_recoverable(
            g, [1] * g.edge_count, [1] * g.edge_count, 1,
            OracleCaps(max_trees=1000),
        )


def test_pair_enumeration_tables():
    g = Graph(3, [(0, 1), (1, 2), (0, 2)])
    pairs = enumerate_pairs(g, [1, 2, 3], [3, 2, 1])
    assert len(pairs.trees) == 3
    for i, t in enumerate(pairs.trees):
        for j, s in enumerate(pairs.trees):
            assert pairs.overlap[i, j] == len(t & s)
            expected = sum((1, 2, 3)[e] for e in t) + sum((3, 2, 1)[e] for e in s)
            assert pairs.total[i, j] == expected


def test_brute_force_recoverable_extremes():
    for inst in instance_stream(15, 62, cost_max=9):
        g = inst.graph
        n = g.node_count
        trees = list(enumerate_spanning_trees(g))
        free = brute_force_recoverable(g, inst.first_cost, inst.second_cost, n - 1)
        assert free.objective == (
            min(sum(int(inst.first_cost[e]) for e in t) for t in trees)
            + min(sum(int(inst.second_cost[e]) for e in t) for t in trees)
        )
        locked = brute_force_recoverable(g, inst.first_cost, inst.second_cost, 0)
        assert locked.objective == min(
            sum(int(inst.first_cost[e] + inst.second_cost[e]) for e in t)
            for t in trees
        )
        assert locked.x_ids == locked.y_ids


def test_simplex_known_optimum():
    # max x + y  s.t. x <= 4, y <= 3, x + y <= 5  ->  5 at a vertex.
    value, x = rational_simplex_max(
        [Fraction(1), Fraction(1)],
        [
            [Fraction(1), Fraction(0)],
            [Fraction(0), Fraction(1)],
            [Fraction(1), Fraction(1)],
        ],
        [Fraction(4), Fraction(3), Fraction(5)],
    )
    assert value == 5
    assert x[0] + x[1] == 5
    assert x[0] <= 4 and x[1] <= 3


def test_simplex_exact_rationals():
    # max 3x + 2y  s.t. 2x + y <= 1, x + 3y <= 1: optimum at the crossing
    # (2/5, 1/5) with value 8/5 — exact fractions, no rounding anywhere.
    value, x = rational_simplex_max(
        [Fraction(3), Fraction(2)],
        [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]],
        [Fraction(1), Fraction(1)],
    )
    assert value == Fraction(8, 5)
    assert x == [Fraction(2, 5), Fraction(1, 5)]


def test_simplex_unbounded():
    with pytest.raises(UnboundedProgramError):
        rational_simplex_max(
            [Fraction(1), Fraction(0)],
            [[Fraction(0), Fraction(1)]],
            [Fraction(1)],
        )


def test_simplex_degenerate_terminates():
    # Highly degenerate: many redundant rows through the origin; Bland's
    # rule must still terminate.
    rows = [[Fraction(1), Fraction(-1)]] * 5 + [
        [Fraction(1), Fraction(0)],
        [Fraction(0), Fraction(1)],
    ]
    rhs = [Fraction(0)] * 5 + [Fraction(2), Fraction(2)]
    value, x = rational_simplex_max([Fraction(1), Fraction(1)], rows, rhs)
    assert value == 4


def test_discrete_adversary_monotone_and_bounded():
    for inst in instance_stream(
        12, 63, cost_max=8, model="budget-discrete", deviation_max=6
    ):
        g = inst.graph
        x = Tree(g, brute_force_recoverable(g, inst.first_cost, inst.second_cost, inst.k).x_ids)
        interval_value = brute_force_robust_value(
            x, replace(inst, model="interval", gamma=0)
        )
        previous = None
        for gamma in range(0, min(g.edge_count, 4) + 1):
            value = brute_force_robust_value(x, inst, gamma)
            if previous is not None:
                assert value >= previous
            assert value <= interval_value
            previous = value
        assert brute_force_robust_value(x, inst, g.edge_count) == interval_value


def test_continuous_cutting_equals_full_lp():
    rng = random.Random(64)
    for inst in instance_stream(
        15, 65, cost_max=8, model="budget-continuous", deviation_max=6,
        gamma_range=(0, 5),
    ):
        g = inst.graph
        trees = list(enumerate_spanning_trees(g))
        x = Tree(g, trees[rng.randrange(len(trees))])
        assert adversary_value_cutting(x, inst) == adversary_value_full_lp(x, inst)


def test_continuous_value_sandwich():
    # The LP value dominates every sampled feasible scenario's inner
    # minimum and never exceeds the interval (all-up) value.
    inst = generate_instance(
        5, 8, cost_max=7, deviation_max=5, model="budget-continuous",
        gamma=4, seed=66,
    )
    g = inst.graph
    trees = list(enumerate_spanning_trees(g))
    x = Tree(g, trees[0])
    L = inst.overlap_target
    feasible = [t for t in trees if len(t & x.edge_ids) >= L]
    exact = adversary_value_cutting(x, inst)
    interval_inner = min(
        sum(int(inst.second_cost[e] + inst.deviation[e]) for e in t)
        for t in feasible
    )
    assert exact <= interval_inner
    member = np.zeros((len(feasible), g.edge_count), dtype=np.int64)
    for i, t in enumerate(feasible):
        member[i, sorted(t)] = 1
    rng = random.Random(67)
    scenarios = np.empty((10_000, g.edge_count), dtype=np.int64)
    for s in range(scenarios.shape[0]):
        budget = inst.gamma
        bump = [0] * g.edge_count
        for e in rng.sample(range(g.edge_count), g.edge_count):
            if budget == 0:
                break
            amount = min(int(inst.deviation[e]), budget)
            if amount:
                amount = rng.randint(0, amount)
            bump[e] = amount
            budget -= amount
        scenarios[s] = np.asarray(bump) + inst.second_cost
    inners = (member @ scenarios.T).min(axis=0)
    assert int(inners.max()) <= exact


def test_brute_force_robust_models_agree_when_trivial():
    for inst in instance_stream(10, 68, cost_max=8):
        zero_dev = replace(inst, deviation=[0] * inst.graph.edge_count)
        rec = brute_force_recoverable(
            inst.graph, inst.first_cost, inst.second_cost, inst.k
        )
        for model, gamma in (
            ("interval", 0),
            ("budget-discrete", 2),
            ("budget-continuous", 3),
        ):
            variant = replace(zero_dev, model=model, gamma=min(gamma, inst.graph.edge_count))
            _, value = brute_force_robust(variant)
            assert value == rec.objective
    # Continuous with saturating budget equals the interval optimum.
    for inst in instance_stream(
        8, 69, cost_max=7, model="budget-continuous", deviation_max=4
    ):
        saturated = replace(inst, gamma=int(inst.deviation.sum()))
        _, value = brute_force_robust(saturated)
        assert value == solve_interval(replace(inst, model="interval", gamma=0)).objective


def test_discrete_subset_cap():
    inst = generate_instance(
        6, 12, cost_max=5, model="budget-discrete", gamma=6, seed=70
    )
    x = Tree(inst.graph, brute_force_recoverable(
        inst.graph, inst.first_cost, inst.second_cost, inst.k
    ).x_ids)
    with pytest.raises(OracleCapExceeded):
        brute_force_robust_value(x, inst, caps=OracleCaps(max_subsets=3))
