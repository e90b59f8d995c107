"""Minimum spanning trees with a deterministic tie-break.

Edges are considered in increasing ``(cost, edge_id)`` order, so equal-cost
ties always resolve towards the smaller edge id and every caller sees the
same tree for the same input.  Costs may be arbitrary Python integers; all
comparisons and sums are exact.
"""

from __future__ import annotations

from typing import Sequence

from .errors import GraphConnectivityError, InvalidParameterError
from .graph import Graph, Tree, UnionFind, path_between, tree_parent_arrays


def _validated_costs(graph: Graph, costs) -> list[int]:
    values = [int(v) for v in costs]
    if len(values) != graph.edge_count:
        raise InvalidParameterError(
            f"costs: expected {graph.edge_count} entries, got {len(values)}"
        )
    return values


def kruskal_from_order(graph: Graph, order: Sequence[int]) -> frozenset[int]:
    """Run the greedy tree-building pass over edges in the given order.

    Raises :class:`GraphConnectivityError` if the edges do not connect the
    graph.
    """
    uf = UnionFind(graph.node_count)
    chosen: list[int] = []
    need = graph.node_count - 1
    for e in order:
        u, v = graph.edges[e]
        if uf.union(u, v):
            chosen.append(e)
            if len(chosen) == need:
                break
    if len(chosen) != need:
        raise GraphConnectivityError("graph is not connected")
    return frozenset(chosen)


def minimum_spanning_tree(graph: Graph, costs) -> Tree:
    """Minimum spanning tree under integer costs, smallest edge ids on ties.

    O(m log m).  Raises :class:`GraphConnectivityError` on a disconnected
    graph.
    """
    values = _validated_costs(graph, costs)
    order = sorted(range(graph.edge_count), key=lambda e: (values[e], e))
    return Tree(graph, kruskal_from_order(graph, order))


def check_path_optimality(graph: Graph, tree: Tree, costs) -> list[tuple[int, int]]:
    """List the exchange-optimality violations of a spanning tree.

    A pair ``(e, f)`` is a violation when ``e`` is a non-tree edge, ``f``
    lies on the tree path joining the endpoints of ``e``, and ``e`` is
    strictly cheaper than ``f``.  The tree is a minimum spanning tree if and
    only if the result is empty.  Pairs are listed with ``e`` ascending and
    ``f`` in path order.
    """
    values = _validated_costs(graph, costs)
    parent_node, parent_edge, depth = tree_parent_arrays(tree)
    violations: list[tuple[int, int]] = []
    for e in range(graph.edge_count):
        if e in tree:
            continue
        u, v = graph.edges[e]
        for f in path_between(parent_node, parent_edge, depth, u, v):
            if values[e] < values[f]:
                violations.append((e, f))
    return violations
