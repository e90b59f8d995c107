"""Robust two-stage spanning trees: exact interval solver, budget-model
approximations with per-instance certified ratios, and value evaluation.

The problem: commit to a spanning tree ``X`` paying first-stage costs, then
an adversary fixes second-stage costs inside the instance's uncertainty
set, and a recovery tree ``Y`` with ``|X ∩ Y| >= n-1-k`` is bought at those
costs.  ``F(X)`` denotes the worst-case total cost of committing to ``X``.

Under the plain interval model the adversary always raises every cost to
its upper limit, so the problem reduces to one recoverable solve with
worst-case second-stage costs and is solved exactly.  Under the two budget
models (at most ``gamma`` edges raised / total increase at most ``gamma``)
exact minimisation is out of reach, so :func:`approx_discrete_budget` and
:func:`approx_continuous_budget` return a good pair together with an
:class:`ApproxCertificate` whose ``certified_ratio`` bounds how far the
pair's worst case can sit above the true optimum.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidParameterError, OracleCapExceeded, SolverInvariantError
from .graph import MAX_COST_MAGNITUDE, Tree
from .incsolver import solve_incremental
from .instances import (
    MODEL_CONTINUOUS,
    MODEL_DISCRETE,
    MODEL_INTERVAL,
    RobustInstance,
    instance_digest,
)
from .oracle import (
    DEFAULT_CAPS,
    OracleCaps,
    adversary_value_cutting,
    brute_force_robust_value,
)
from .recsolver import solve_recoverable


@dataclass(frozen=True)
class RobustSolution:
    """Exact answer for the interval model: the optimal committed pair and
    its worst-case total cost."""

    x_tree: Tree
    y_tree: Tree
    objective: int


@dataclass(frozen=True)
class ApproxCertificate:
    """A committed pair plus everything known about its quality.

    ``objective`` is the pair's worst-case total: first-stage cost of
    ``x_tree`` plus :func:`worst_case_fixed_tree` of ``y_tree``.  It is an
    upper bound on ``F(x_tree)`` and is exactly reproducible from the two
    trees and the instance.

    Three independent ratio arguments may apply; ``certified_ratio`` is the
    best (smallest) of those available, and ``None`` means no finite
    guarantee exists for this instance (possible only in the discrete
    model when nominal second-stage costs vanish on deviating edges):

    * ``ratio_nominal`` — from ``nominal_fraction``, the least fraction of
      worst-case edge cost covered by nominal cost, either over all edges
      (``nominal_fraction_source == "global"``) or summed over the returned
      recovery tree (``"recovery-tree"``).
    * ``ratio_budget`` — continuous model only: the total deviation mass
      divided by the adversary budget, at least 1.
    * ``ratio_value`` — continuous model only, and only when the exact
      worst case of ``x_tree`` was computable and exceeds the budget: the
      budget is then a small fraction ``value_fraction`` of that value.
    """

    x_tree: Tree
    y_tree: Tree
    objective: int
    certified_ratio: Fraction | None
    ratio_nominal: Fraction | None
    ratio_budget: Fraction | None
    ratio_value: Fraction | None
    nominal_fraction: Fraction
    nominal_fraction_source: str
    budget_fraction: Fraction | None
    value_fraction: Fraction | None

    def __post_init__(self):
        for name in ("certified_ratio", "ratio_nominal", "ratio_budget", "ratio_value"):
            ratio = getattr(self, name)
            if ratio is not None and ratio < 1:
                raise InvalidParameterError(f"{name} must be at least 1")
        if not 0 <= self.nominal_fraction <= 1:
            raise InvalidParameterError("nominal_fraction must lie in [0, 1]")
        if self.budget_fraction is not None and not 0 < self.budget_fraction <= 1:
            raise InvalidParameterError("budget_fraction must lie in (0, 1]")
        if self.value_fraction is not None and not 0 <= self.value_fraction < 1:
            raise InvalidParameterError("value_fraction must lie in [0, 1)")
        ratios = [
            r
            for r in (self.ratio_nominal, self.ratio_budget, self.ratio_value)
            if r is not None
        ]
        expected = min(ratios) if ratios else None
        if expected != self.certified_ratio:
            raise InvalidParameterError(
                "certified_ratio must be the minimum of the available ratios"
            )


@dataclass(frozen=True)
class Evaluation:
    """Result of evaluating the worst-case total of a fixed first-stage
    tree.  When ``exact``, ``value == lower == upper``; otherwise ``value``
    is ``None`` and only the bracket ``[lower, upper]`` is certified."""

    value: int | Fraction | None
    lower: int | Fraction
    upper: int | Fraction
    exact: bool
    method: str


def _require_model(inst: RobustInstance, model: str, op: str) -> None:
    if inst.model != model:
        raise InvalidParameterError(
            f"{op} requires model {model!r}, instance has {inst.model!r}"
        )


def worst_case_fixed_tree(y, inst: RobustInstance, gamma: int | None = None) -> int:
    """Largest second-stage cost the adversary can force on tree ``y``.

    Closed form per model: interval — every deviation applies; discrete
    budget — the ``gamma`` largest deviations on ``y`` apply; continuous
    budget — the tree absorbs deviation mass up to ``min(gamma, total)``.
    """
    ids = y.edge_ids if isinstance(y, Tree) else Tree(inst.graph, y).edge_ids
    gamma = inst.gamma if gamma is None else int(gamma)
    if gamma < 0:
        raise InvalidParameterError("gamma must be non-negative")
    nominal = sum(int(inst.second_cost[e]) for e in ids)
    deviations = [int(inst.deviation[e]) for e in ids]
    if inst.model == MODEL_INTERVAL:
        return nominal + sum(deviations)
    if inst.model == MODEL_DISCRETE:
        return nominal + sum(sorted(deviations, reverse=True)[:gamma])
    if inst.model == MODEL_CONTINUOUS:
        return nominal + min(gamma, sum(deviations))
    raise InvalidParameterError(f"unknown model {inst.model!r}")


def _pair_objective(inst: RobustInstance, x_tree: Tree, y_tree: Tree) -> int:
    return x_tree.cost(inst.first_cost) + worst_case_fixed_tree(y_tree, inst)


def solve_interval(
    inst: RobustInstance, *, trace=None, validate: bool = False
) -> RobustSolution:
    """Exact optimum under the interval model.

    The adversary's unique undominated move is to raise every edge to its
    upper cost, so one recoverable solve with second-stage costs ``c + d``
    yields the optimal pair; the objective is its total under those costs.
    """
    _require_model(inst, MODEL_INTERVAL, "solve_interval")
    inst.graph.require_connected()
    rec = solve_recoverable(
        inst.graph,
        inst.first_cost,
        inst.worst_second_cost(),
        inst.k,
        trace=trace,
        validate=validate,
    )
    return RobustSolution(rec.x_tree, rec.y_tree, rec.objective)


def _nominal_fractions(
    second: np.ndarray, worst: np.ndarray, y_ids: frozenset[int]
) -> tuple[Fraction, str]:
    """Best available lower bound on nominal/worst cost fractions.

    The global fraction minimises ``c_e / (c_e + d_e)`` over all edges with
    a positive worst-case cost; the recovery-tree fraction compares the
    summed nominal and worst-case costs of the returned recovery tree and
    is never smaller when that tree carries most of the cost.
    """
    global_fraction = Fraction(1)
    for e in range(len(second)):
        w = int(worst[e])
        if w > 0:
            global_fraction = min(global_fraction, Fraction(int(second[e]), w))
    nominal_sum = sum(int(second[e]) for e in y_ids)
    worst_sum = sum(int(worst[e]) for e in y_ids)
    tree_fraction = Fraction(1) if worst_sum == 0 else Fraction(nominal_sum, worst_sum)
    if global_fraction >= tree_fraction:
        return global_fraction, "global"
    return tree_fraction, "recovery-tree"


def _invert(fraction: Fraction) -> Fraction | None:
    return None if fraction == 0 else 1 / fraction


def approx_discrete_budget(
    inst: RobustInstance, *, trace=None, validate: bool = False
) -> ApproxCertificate:
    """Approximation for the discrete budget model (at most ``gamma`` edge
    costs raised to their upper limits).

    Solves the recoverable problem under nominal second-stage costs and
    returns that pair.  Its worst case exceeds the optimum by at most
    ``1 / nominal_fraction``, because every scenario cost is at least the
    ``nominal_fraction`` multiple of the worst cost.  With all nominal
    costs zero on deviating edges no finite ratio exists and
    ``certified_ratio`` is ``None``; the pair is still returned.
    """
    _require_model(inst, MODEL_DISCRETE, "approx_discrete_budget")
    inst.graph.require_connected()
    rec = solve_recoverable(
        inst.graph,
        inst.first_cost,
        inst.second_cost,
        inst.k,
        trace=trace,
        validate=validate,
    )
    fraction, source = _nominal_fractions(
        inst.second_cost, inst.worst_second_cost(), rec.y_tree.edge_ids
    )
    ratio_nominal = _invert(fraction)
    # A zero budget (or no deviations at all) makes the nominal scenario
    # the only one, so the returned pair is exactly optimal.
    no_uncertainty = inst.gamma == 0 or not inst.deviation.any()
    value_fraction = Fraction(0) if no_uncertainty else None
    ratio_value = Fraction(1) if no_uncertainty else None
    ratios = [r for r in (ratio_nominal, ratio_value) if r is not None]
    return ApproxCertificate(
        x_tree=rec.x_tree,
        y_tree=rec.y_tree,
        objective=_pair_objective(inst, rec.x_tree, rec.y_tree),
        certified_ratio=min(ratios) if ratios else None,
        ratio_nominal=ratio_nominal,
        ratio_budget=None,
        ratio_value=ratio_value,
        nominal_fraction=fraction,
        nominal_fraction_source=source,
        budget_fraction=None,
        value_fraction=value_fraction,
    )


def _scaled_surrogate_costs(
    inst: RobustInstance, capped: np.ndarray, total: int
) -> tuple[list[int], list[int]]:
    """Integer costs encoding the continuous-model surrogate scenario.

    The surrogate splits the budget over edges in proportion to deviation
    mass: edge ``e`` gets ``c_e + d_e * min(1, gamma/total)``.  Multiplying
    every cost by ``total`` clears denominators without changing which
    pair is optimal; a common factor is then divided back out to keep the
    numbers small.
    """
    weight = min(total, inst.gamma)
    first = [total * int(v) for v in inst.first_cost]
    second = [
        total * int(inst.second_cost[e]) + weight * int(capped[e])
        for e in range(inst.graph.edge_count)
    ]
    common = math.gcd(*first, *second) if first or second else 1
    if common > 1:
        first = [v // common for v in first]
        second = [v // common for v in second]
    if any(v >= MAX_COST_MAGNITUDE for v in first + second):
        raise InvalidParameterError(
            "surrogate costs exceed the solver's integer range; "
            "reduce cost magnitudes or the deviation budget"
        )
    return first, second


def approx_continuous_budget(
    inst: RobustInstance,
    *,
    caps: OracleCaps = DEFAULT_CAPS,
    trace=None,
    validate: bool = False,
) -> ApproxCertificate:
    """Approximation for the continuous budget model (total cost increase
    at most ``gamma``, per-edge at most ``d_e``).

    Deviations are first capped at ``gamma`` (larger ones can never be
    used in full).  With no usable deviation mass the nominal recoverable
    pair is exactly optimal.  Otherwise the pair optimal under a surrogate
    scenario — budget spread over edges in proportion to deviation mass —
    is returned with up to three certified ratios (see
    :class:`ApproxCertificate`); the budget ratio alone already bounds the
    ratio by the edge count, so ``certified_ratio`` is always finite here.
    """
    _require_model(inst, MODEL_CONTINUOUS, "approx_continuous_budget")
    inst.graph.require_connected()
    capped = np.minimum(inst.deviation, inst.gamma)
    total = sum(int(v) for v in capped)
    if total == 0:
        rec = solve_recoverable(
            inst.graph,
            inst.first_cost,
            inst.second_cost,
            inst.k,
            trace=trace,
            validate=validate,
        )
        one = Fraction(1)
        return ApproxCertificate(
            x_tree=rec.x_tree,
            y_tree=rec.y_tree,
            objective=_pair_objective(inst, rec.x_tree, rec.y_tree),
            certified_ratio=one,
            ratio_nominal=_invert(
                _nominal_fractions(
                    inst.second_cost, inst.second_cost + capped, rec.y_tree.edge_ids
                )[0]
            ),
            ratio_budget=one,
            ratio_value=one,
            nominal_fraction=Fraction(1),
            nominal_fraction_source="global",
            budget_fraction=one,
            value_fraction=Fraction(0),
        )
    first, second = _scaled_surrogate_costs(inst, capped, total)
    rec = solve_recoverable(
        inst.graph, first, second, inst.k, trace=trace, validate=validate
    )
    budget_fraction = min(Fraction(1), Fraction(inst.gamma, total))
    ratio_budget = 1 / budget_fraction
    fraction, source = _nominal_fractions(
        inst.second_cost, inst.second_cost + capped, rec.y_tree.edge_ids
    )
    ratio_nominal = _invert(fraction)
    value_fraction = None
    ratio_value = None
    evaluation = robust_value(rec.x_tree, inst, caps=caps)
    if evaluation.exact and evaluation.value > inst.gamma:
        value_fraction = Fraction(inst.gamma) / Fraction(evaluation.value)
        ratio_value = 1 / (1 - value_fraction)
    ratios = [r for r in (ratio_nominal, ratio_budget, ratio_value) if r is not None]
    certified = min(ratios)
    if inst.graph.edge_count and certified > inst.graph.edge_count:
        raise SolverInvariantError(
            "certified ratio exceeded the edge count; deviations were not capped"
        )
    return ApproxCertificate(
        x_tree=rec.x_tree,
        y_tree=rec.y_tree,
        objective=_pair_objective(inst, rec.x_tree, rec.y_tree),
        certified_ratio=certified,
        ratio_nominal=ratio_nominal,
        ratio_budget=ratio_budget,
        ratio_value=ratio_value,
        nominal_fraction=fraction,
        nominal_fraction_source=source,
        budget_fraction=budget_fraction,
        value_fraction=value_fraction,
    )


def solve_robust(
    inst: RobustInstance,
    *,
    caps: OracleCaps = DEFAULT_CAPS,
    trace=None,
    validate: bool = False,
) -> RobustSolution | ApproxCertificate:
    """Model dispatch: exact for interval, certified approximation for the
    budget models."""
    if inst.model == MODEL_INTERVAL:
        return solve_interval(inst, trace=trace, validate=validate)
    if inst.model == MODEL_DISCRETE:
        return approx_discrete_budget(inst, trace=trace, validate=validate)
    if inst.model == MODEL_CONTINUOUS:
        return approx_continuous_budget(
            inst, caps=caps, trace=trace, validate=validate
        )
    raise InvalidParameterError(f"unknown model {inst.model!r}")


def _as_tree(x, inst: RobustInstance) -> Tree:
    return x if isinstance(x, Tree) else Tree(inst.graph, x)


def _sampled_scenarios(
    inst: RobustInstance, gamma: int, samples: int = 24
) -> list[list[int]]:
    """Deterministic feasible scenarios used for lower bounds.

    Always includes the nominal scenario and a greedy spend of the budget
    on the largest deviations; the remainder are seeded-random feasible
    spends.  Every returned cost vector is a scenario the adversary could
    actually play, so each one's best recovery cost lower-bounds the true
    worst case.
    """
    m = inst.graph.edge_count
    nominal = [int(v) for v in inst.second_cost]
    deviation = [int(v) for v in inst.deviation]
    scenarios = [list(nominal)]
    order = sorted(range(m), key=lambda e: (-deviation[e], e))

    def spend(sequence, rng=None) -> list[int]:
        costs = list(nominal)
        remaining = gamma
        if inst.model == MODEL_DISCRETE:
            for e in sequence:
                if remaining == 0:
                    break
                if deviation[e] > 0:
                    costs[e] += deviation[e]
                    remaining -= 1
        else:
            for e in sequence:
                if remaining == 0:
                    break
                amount = min(deviation[e], remaining)
                if rng is not None and amount > 0:
                    amount = rng.randint(1, amount)
                costs[e] += amount
                remaining -= amount
        return costs

    scenarios.append(spend(order))
    rng = random.Random(int(instance_digest(inst)[:16], 16) ^ gamma)
    for _ in range(samples):
        shuffled = list(range(m))
        rng.shuffle(shuffled)
        scenarios.append(spend(shuffled, rng=rng))
    return scenarios


def _bounded_evaluation(
    x: Tree, inst: RobustInstance, gamma: int
) -> Evaluation:
    """Certified bracket around ``F(x)`` when exact evaluation is too big.

    Lower bound: best recovery cost against each of a deterministic set of
    feasible scenarios, maximised.  Upper bound: a few good fixed recovery
    trees, each charged its closed-form worst case, minimised.
    """
    graph = inst.graph
    first_stage = x.cost(inst.first_cost)
    lower = 0
    for costs in _sampled_scenarios(inst, gamma):
        lower = max(lower, solve_incremental(graph, costs, x, inst.k).cost)
    candidates = [
        solve_incremental(graph, [int(v) for v in inst.second_cost], x, inst.k).tree,
        solve_incremental(
            graph, [int(v) for v in inst.worst_second_cost()], x, inst.k
        ).tree,
    ]
    if inst.model == MODEL_CONTINUOUS:
        capped = np.minimum(inst.deviation, gamma)
        candidates.append(
            solve_incremental(
                graph, [int(inst.second_cost[e] + capped[e]) for e in range(graph.edge_count)], x, inst.k
            ).tree
        )
    upper = min(worst_case_fixed_tree(y, inst, gamma) for y in candidates)
    if lower > upper:
        raise SolverInvariantError(
            "scenario lower bound exceeded the fixed-tree upper bound"
        )
    return Evaluation(
        value=None,
        lower=first_stage + lower,
        upper=first_stage + upper,
        exact=False,
        method="bounds",
    )


def robust_value(
    x,
    inst: RobustInstance,
    gamma: int | None = None,
    *,
    caps: OracleCaps = DEFAULT_CAPS,
) -> Evaluation:
    """Worst-case total cost ``F(x)`` of committing to first-stage tree ``x``.

    Interval model: exact and fast — the single worst scenario is solved
    with the incremental solver.  A zero budget likewise reduces to one
    nominal incremental solve.  Otherwise the discrete model needs
    deviation-subset enumeration and the continuous model a cutting-plane
    program, both exact but enumeration-bounded: when the instance exceeds
    ``caps`` a certified ``[lower, upper]`` bracket is returned instead of
    failing (``exact`` is ``False`` and ``value`` is ``None``).
    """
    x = _as_tree(x, inst)
    gamma = inst.gamma if gamma is None else int(gamma)
    if gamma < 0:
        raise InvalidParameterError("gamma must be non-negative")
    graph = inst.graph
    first_stage = x.cost(inst.first_cost)
    if inst.model == MODEL_INTERVAL:
        worst = [int(v) for v in inst.worst_second_cost()]
        value = first_stage + solve_incremental(graph, worst, x, inst.k).cost
        return Evaluation(value, value, value, True, "incremental")
    if inst.model not in (MODEL_DISCRETE, MODEL_CONTINUOUS):
        raise InvalidParameterError(f"unknown model {inst.model!r}")
    if gamma == 0 or not inst.deviation.any():
        nominal = [int(v) for v in inst.second_cost]
        value = first_stage + solve_incremental(graph, nominal, x, inst.k).cost
        return Evaluation(value, value, value, True, "incremental")
    try:
        if inst.model == MODEL_DISCRETE:
            value = brute_force_robust_value(x, inst, gamma, caps)
            return Evaluation(value, value, value, True, "subset-enumeration")
        raw = first_stage + adversary_value_cutting(x, inst, gamma, caps)
        value = int(raw) if raw.denominator == 1 else raw
        return Evaluation(value, value, value, True, "cutting-plane")
    except OracleCapExceeded:
        return _bounded_evaluation(x, inst, gamma)
