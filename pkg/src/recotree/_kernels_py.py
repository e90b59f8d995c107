"""Pure-Python backend for the solver's hot kernels.

Mirrors :mod:`recotree._speedups` exactly: same signatures, same outputs in
the same order.  Loops over tree paths are plain Python; the graph searches
run as vectorised numpy sweeps.
"""

from __future__ import annotations

import numpy as np


def pair_table(
    eu: np.ndarray,
    ev: np.ndarray,
    in_tree: np.ndarray,
    parent_node: np.ndarray,
    parent_edge: np.ndarray,
    depth: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Enumerate all (non-tree edge, tree-path edge) pairs.

    For every edge ``e`` outside the tree, in ascending order of ``e``, emit
    one pair per edge ``f`` on the tree path joining the endpoints of ``e``,
    in path order from the first endpoint.  Returns two parallel int64
    arrays ``(nontree_ids, tree_ids)``.
    """
    pn = parent_node.tolist()
    pe = parent_edge.tolist()
    dp = depth.tolist()
    us = eu.tolist()
    vs = ev.tolist()
    member = in_tree.tolist()
    nontree: list[int] = []
    treeedge: list[int] = []
    for e in range(len(us)):
        if member[e]:
            continue
        a, b = us[e], vs[e]
        up: list[int] = []
        down: list[int] = []
        while dp[a] > dp[b]:
            up.append(pe[a])
            a = pn[a]
        while dp[b] > dp[a]:
            down.append(pe[b])
            b = pn[b]
        while a != b:
            up.append(pe[a])
            a = pn[a]
            down.append(pe[b])
            b = pn[b]
        down.reverse()
        for f in up:
            nontree.append(e)
            treeedge.append(f)
        for f in down:
            nontree.append(e)
            treeedge.append(f)
    return (
        np.array(nontree, dtype=np.int64),
        np.array(treeedge, dtype=np.int64),
    )


def reach_forward(
    node_count: int,
    tails: np.ndarray,
    heads: np.ndarray,
    seed: np.ndarray,
) -> np.ndarray:
    """Nodes reachable from the seed set along directed arcs (seeds included)."""
    reached = seed.copy()
    if tails.size == 0:
        return reached
    while True:
        crossing = reached[tails] & ~reached[heads]
        if not crossing.any():
            return reached
        reached[heads[crossing]] = True


def bfs_backward(
    node_count: int,
    tails: np.ndarray,
    heads: np.ndarray,
    target: np.ndarray,
) -> np.ndarray:
    """Arc-count distance from each node to the target set, -1 if unreachable.

    Distances follow the arcs forward (node -> ... -> target); the search
    itself runs backwards from the targets level by level.
    """
    dist = np.full(node_count, -1, dtype=np.int64)
    dist[target] = 0
    if tails.size == 0:
        return dist
    level = 0
    while True:
        frontier = (dist[heads] == level) & (dist[tails] < 0)
        if not frontier.any():
            return dist
        dist[tails[frontier]] = level + 1
        level += 1
