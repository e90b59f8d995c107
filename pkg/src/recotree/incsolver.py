"""Incremental spanning tree: cheapest tree sharing enough edges with a base.

Minimise ``sum(costs[e] for e in Y)`` over spanning trees ``Y`` with
``|Y ∩ base| >= L`` where ``L = n-1-k``.  This is the recovery step of the
two-stage problems: ``base`` is the committed first-stage tree and ``k``
bounds how many edges the recovery may replace.

The cardinality constraint is handled by a Lagrangian / parametric scheme:
subtract a shift ``lam >= 0`` from every base edge's cost, making base
edges progressively more attractive, and search the finite set of integer
breakpoints (pairwise cost differences) for the smallest shift whose
tie-break-aware minimum spanning tree meets the constraint.  A final
exchange pass swaps equal-shifted-cost edges to land on intersection
exactly ``L``, which yields the classic complementary-slackness
certificate: the result is a minimum spanning tree under shifted costs and
either ``lam == 0`` or the constraint is tight.

Costs may be arbitrarily large Python integers (the robust oracle feeds
scaled rationals through here); everything stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError, SolverInvariantError
from .graph import Graph, Tree, path_between, tree_parent_arrays
from .mst import check_path_optimality, kruskal_from_order


@dataclass(frozen=True)
class IncSolution:
    """Optimal recovery tree, its true cost, and the shift that certified it."""

    tree: Tree
    cost: int
    shift: int


def _overlap(edge_ids: frozenset[int], base_ids: frozenset[int]) -> int:
    return len(edge_ids & base_ids)


def solve_incremental(graph: Graph, costs, base: Tree, k: int) -> IncSolution:
    """Solve the incremental spanning tree problem exactly.

    Runs O(log m) spanning-tree computations for the breakpoint search plus
    an O(n·m)-per-step exchange fix-up.  The returned solution satisfies
    ``|Y ∩ base| >= n-1-k``; with ``k = n-1`` it is a plain minimum
    spanning tree and with ``k = 0`` it is ``base`` itself.
    """
    if base.graph is not graph:
        raise InvalidParameterError("base tree does not belong to this graph")
    n = graph.node_count
    m = graph.edge_count
    values = [int(v) for v in costs]
    if len(values) != m:
        raise InvalidParameterError(f"costs: expected {m} entries, got {len(values)}")
    k = int(k)
    if not 0 <= k <= n - 1:
        raise InvalidParameterError(f"k must be in [0, {n - 1}], got {k}")
    target = n - 1 - k
    base_ids = base.edge_ids

    def prefer_base_tree(lam: int) -> frozenset[int]:
        order = sorted(
            range(m),
            key=lambda e: (values[e] - (lam if e in base_ids else 0),
                           0 if e in base_ids else 1,
                           e),
        )
        return kruskal_from_order(graph, order)

    plain = kruskal_from_order(
        graph, sorted(range(m), key=lambda e: (values[e], e))
    )
    if _overlap(plain, base_ids) >= target:
        return _finish(graph, values, base_ids, plain, 0, target)
    preferred = prefer_base_tree(0)
    if _overlap(preferred, base_ids) >= target:
        # Still an unshifted minimum spanning tree, only the tie-break favours
        # base edges, so its true cost matches the unconstrained optimum.
        return _finish(graph, values, base_ids, preferred, 0, target)

    breakpoints = sorted({
        values[b] - values[a]
        for b in base_ids
        for a in range(m)
        if a not in base_ids and values[b] > values[a]
    })
    if not breakpoints:
        raise SolverInvariantError("no shift can raise the base overlap")
    lo, hi = 0, len(breakpoints) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _overlap(prefer_base_tree(breakpoints[mid]), base_ids) >= target:
            hi = mid
        else:
            lo = mid + 1
    lam = breakpoints[lo]
    tree_ids = prefer_base_tree(lam)
    if _overlap(tree_ids, base_ids) < target:
        raise SolverInvariantError("breakpoint search missed the overlap target")
    tree_ids = _exchange_down(graph, values, base_ids, tree_ids, lam, target)
    return _finish(graph, values, base_ids, tree_ids, lam, target)


def _exchange_down(
    graph: Graph,
    values: list[int],
    base_ids: frozenset[int],
    tree_ids: frozenset[int],
    lam: int,
    target: int,
) -> frozenset[int]:
    """Swap equal-shifted-cost edges until the base overlap is exactly target.

    Each step removes a base edge and inserts a non-base edge of equal
    shifted cost from its cycle, so the tree stays optimal for the shifted
    costs while its true cost drops by ``lam``.
    """
    while _overlap(tree_ids, base_ids) > target:
        tree = Tree(graph, tree_ids)
        parents = tree_parent_arrays(tree)
        swap: tuple[int, int] | None = None
        for e in range(graph.edge_count):
            if e in tree_ids or e in base_ids:
                continue
            u, v = graph.edges[e]
            for f in path_between(*parents, u, v):
                if f in base_ids and values[f] - lam == values[e]:
                    swap = (e, f)
                    break
            if swap:
                break
        if swap is None:
            raise SolverInvariantError("no equal-cost exchange available")
        e, f = swap
        tree_ids = (tree_ids - {f}) | {e}
    return tree_ids


def _finish(
    graph: Graph,
    values: list[int],
    base_ids: frozenset[int],
    tree_ids: frozenset[int],
    lam: int,
    target: int,
) -> IncSolution:
    tree = Tree(graph, tree_ids)
    overlap = _overlap(tree_ids, base_ids)
    if overlap < target:
        raise SolverInvariantError("result misses the overlap constraint")
    shifted = [values[e] - (lam if e in base_ids else 0) for e in range(graph.edge_count)]
    if check_path_optimality(graph, tree, shifted):
        raise SolverInvariantError("result is not optimal under shifted costs")
    if lam != 0 and overlap != target:
        raise SolverInvariantError("positive shift without a tight overlap")
    return IncSolution(tree=tree, cost=sum(values[e] for e in tree_ids), shift=lam)
