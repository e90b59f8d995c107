"""Shared helpers for the test suite: seeded instance streams and
enumeration-based reference computations."""

from __future__ import annotations

import random

from recotree import RobustInstance, generate_instance


def instance_stream(
    count: int,
    seed: int,
    *,
    n_range=(4, 7),
    m_extra: int = 4,
    cost_max: int = 15,
    model: str = "interval",
    gamma_range=(0, 0),
    deviation_max: int | None = None,
):
    """Yield ``count`` deterministic random instances of varied shape."""
    rng = random.Random(seed)
    for i in range(count):
        n = rng.randint(*n_range)
        m = rng.randint(n - 1, n - 1 + m_extra)
        gamma = rng.randint(*gamma_range)
        yield generate_instance(
            n,
            m,
            cost_max=cost_max,
            deviation_max=deviation_max,
            model=model,
            gamma=gamma,
            seed=seed * 1_000_000 + i,
        )


def inner_minimum(trees, base_ids, costs, min_overlap: int) -> int:
    """Cheapest tree among ``trees`` sharing ``min_overlap`` edges with
    ``base_ids`` — the brute-force incremental reference."""
    best = None
    for t in trees:
        if len(t & base_ids) >= min_overlap:
            total = sum(int(costs[e]) for e in t)
            if best is None or total < best:
                best = total
    assert best is not None, "no feasible recovery tree"
    return best


def positive_costs(inst: RobustInstance, seed: int) -> RobustInstance:
    """Copy of ``inst`` with strictly positive nominal second-stage costs."""
    from dataclasses import replace

    rng = random.Random(seed)
    second = [max(1, int(v)) if rng.random() < 0.9 else rng.randint(1, 5)
              for v in inst.second_cost]
    return replace(inst, second_cost=second)
