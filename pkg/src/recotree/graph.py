"""Multigraph, spanning-tree and edge-partition primitives.

Graphs are undirected multigraphs on nodes ``0..n-1``.  Edges are identified
by their position in the edge list, so parallel edges are distinct objects;
self-loops are rejected.  Spanning trees are frozen sets of edge ids wrapped
in :class:`Tree`, which validates on construction.  All cost vectors are
integer valued and all arithmetic on them is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    GraphConnectivityError,
    IllegalMoveError,
    InvalidParameterError,
    InvalidTreeError,
)

# Costs are kept well inside int64 so sums and differences never overflow.
MAX_COST_MAGNITUDE = 2**61


class UnionFind:
    """Disjoint sets over ``0..n-1`` with union by rank and path compression."""

    __slots__ = ("parent", "rank", "components")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.components -= 1
        return True


class Graph:
    """Undirected multigraph with positional edge ids.

    Parameters
    ----------
    node_count:
        Number of nodes; nodes are ``0..node_count-1``.
    edges:
        Sequence of ``(u, v)`` pairs.  Edge ``i`` is ``edges[i]``.  Parallel
        edges are allowed; self-loops raise :class:`InvalidParameterError`.
    """

    __slots__ = ("node_count", "edges", "adjacency", "_eu", "_ev", "_connected")

    def __init__(self, node_count: int, edges: Sequence[tuple[int, int]]):
        node_count = int(node_count)
        if node_count < 1:
            raise InvalidParameterError("node_count must be at least 1")
        clean: list[tuple[int, int]] = []
        for i, (u, v) in enumerate(edges):
            u, v = int(u), int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise InvalidParameterError(
                    f"edge {i}: endpoint out of range for {node_count} nodes"
                )
            if u == v:
                raise InvalidParameterError(f"edge {i}: self-loops are not allowed")
            clean.append((u, v))
        self.node_count = node_count
        self.edges = tuple(clean)
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(node_count)]
        for i, (u, v) in enumerate(clean):
            adjacency[u].append((i, v))
            adjacency[v].append((i, u))
        self.adjacency = tuple(tuple(a) for a in adjacency)
        self._eu: np.ndarray | None = None
        self._ev: np.ndarray | None = None
        self._connected: bool | None = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def endpoint_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints as two int64 arrays, cached."""
        if self._eu is None:
            self._eu = np.array([u for u, _ in self.edges], dtype=np.int64)
            self._ev = np.array([v for _, v in self.edges], dtype=np.int64)
        return self._eu, self._ev

    def is_connected(self) -> bool:
        if self._connected is None:
            uf = UnionFind(self.node_count)
            for u, v in self.edges:
                uf.union(u, v)
            self._connected = uf.components == 1
        return self._connected

    def require_connected(self) -> None:
        if not self.is_connected():
            raise GraphConnectivityError("graph is not connected")

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


def is_spanning_tree(graph: Graph, edge_ids: Iterable[int]) -> bool:
    """True if ``edge_ids`` is a spanning tree of ``graph``."""
    ids = list(edge_ids)
    if len(ids) != graph.node_count - 1:
        return False
    uf = UnionFind(graph.node_count)
    for e in ids:
        if not (0 <= e < graph.edge_count):
            return False
        u, v = graph.edges[e]
        if not uf.union(u, v):
            return False
    return uf.components == 1


@dataclass(frozen=True)
class Tree:
    """A validated spanning tree, stored as a frozen set of edge ids."""

    graph: Graph
    edge_ids: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "edge_ids", frozenset(int(e) for e in self.edge_ids))
        if not is_spanning_tree(self.graph, self.edge_ids):
            raise InvalidTreeError(
                f"edge set {sorted(self.edge_ids)} is not a spanning tree"
            )

    def __contains__(self, edge_id: int) -> bool:
        return edge_id in self.edge_ids

    def sorted_ids(self) -> list[int]:
        return sorted(self.edge_ids)

    def cost(self, costs: np.ndarray) -> int:
        """Exact total cost of the tree under ``costs``."""
        return sum(int(costs[e]) for e in self.edge_ids)

    def member_mask(self) -> np.ndarray:
        mask = np.zeros(self.graph.edge_count, dtype=bool)
        for e in self.edge_ids:
            mask[e] = True
        return mask


def tree_parent_arrays(tree: Tree) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Root the tree at node 0 and return parent/depth arrays.

    Returns ``(parent_node, parent_edge, depth)`` as int64 arrays indexed by
    node, with ``parent_node[0] == -1`` and ``parent_edge[0] == -1``.  Rebuilt
    per call; O(n).
    """
    graph = tree.graph
    n = graph.node_count
    member = tree.edge_ids
    parent_node = np.full(n, -1, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for eid, w in graph.adjacency[u]:
            if eid in member and not seen[w]:
                seen[w] = True
                parent_node[w] = u
                parent_edge[w] = eid
                depth[w] = depth[u] + 1
                stack.append(w)
    return parent_node, parent_edge, depth


def path_between(
    parent_node: np.ndarray,
    parent_edge: np.ndarray,
    depth: np.ndarray,
    u: int,
    v: int,
) -> list[int]:
    """Edge ids on the unique tree path from ``u`` to ``v``, in path order."""
    up: list[int] = []
    down: list[int] = []
    while depth[u] > depth[v]:
        up.append(int(parent_edge[u]))
        u = int(parent_node[u])
    while depth[v] > depth[u]:
        down.append(int(parent_edge[v]))
        v = int(parent_node[v])
    while u != v:
        up.append(int(parent_edge[u]))
        u = int(parent_node[u])
        down.append(int(parent_edge[v]))
        v = int(parent_node[v])
    down.reverse()
    return up + down


def tree_path(tree: Tree, edge_id: int) -> list[int]:
    """Tree edges on the path joining the endpoints of a non-tree edge.

    ``edge_id`` must not belong to the tree.  The result is ordered from the
    first endpoint of the edge towards the second.
    """
    graph = tree.graph
    if not (0 <= edge_id < graph.edge_count):
        raise InvalidParameterError(f"edge id {edge_id} out of range")
    if edge_id in tree:
        raise InvalidParameterError(f"edge {edge_id} is a tree edge; no cycle path")
    parent_node, parent_edge, depth = tree_parent_arrays(tree)
    u, v = graph.edges[edge_id]
    return path_between(parent_node, parent_edge, depth, u, v)


def apply_move(tree: Tree, add: int, remove: int) -> Tree:
    """Exchange one edge: add a non-tree edge, remove one from its cycle.

    Raises :class:`IllegalMoveError` unless ``add`` is a non-tree edge,
    ``remove`` is a tree edge, and ``remove`` lies on the cycle that ``add``
    closes (equivalently, the result is again a spanning tree).
    """
    if add in tree:
        raise IllegalMoveError(f"edge {add} is already in the tree")
    if remove not in tree:
        raise IllegalMoveError(f"edge {remove} is not in the tree")
    if remove not in tree_path(tree, add):
        raise IllegalMoveError(
            f"removing edge {remove} after adding edge {add} breaks the tree"
        )
    return Tree(tree.graph, (tree.edge_ids - {remove}) | {add})


@dataclass(frozen=True)
class EdgePartition:
    """Partition of all edge ids induced by a pair of trees (X, Y).

    ``x_only`` holds edges of X only, ``y_only`` edges of Y only, ``shared``
    the intersection, ``outside`` everything else.
    """

    x_only: frozenset[int]
    y_only: frozenset[int]
    shared: frozenset[int]
    outside: frozenset[int]

    @property
    def overlap(self) -> int:
        return len(self.shared)

    def class_of(self, edge_id: int) -> str:
        if edge_id in self.shared:
            return "shared"
        if edge_id in self.x_only:
            return "x_only"
        if edge_id in self.y_only:
            return "y_only"
        return "outside"


def partition_of(x_tree: Tree, y_tree: Tree) -> EdgePartition:
    """Classify every edge of the graph relative to the tree pair."""
    if x_tree.graph is not y_tree.graph:
        raise InvalidParameterError("trees must belong to the same graph")
    xs, ys = x_tree.edge_ids, y_tree.edge_ids
    shared = xs & ys
    all_ids = frozenset(range(x_tree.graph.edge_count))
    return EdgePartition(
        x_only=frozenset(xs - ys),
        y_only=frozenset(ys - xs),
        shared=frozenset(shared),
        outside=frozenset(all_ids - xs - ys),
    )


def as_cost_array(costs, edge_count: int, name: str = "costs") -> np.ndarray:
    """Validate a cost vector and return it as an int64 array.

    Accepts any sequence of Python ints or an integer-dtype numpy array of
    length ``edge_count``.  Booleans, floats and out-of-range magnitudes are
    rejected so later arithmetic stays exact.
    """
    if isinstance(costs, np.ndarray):
        if not np.issubdtype(costs.dtype, np.integer):
            raise InvalidParameterError(f"{name}: dtype must be integer")
        values = [int(v) for v in costs.tolist()]
    else:
        values = []
        for i, v in enumerate(costs):
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise InvalidParameterError(f"{name}[{i}]: must be an integer")
            values.append(int(v))
    if len(values) != edge_count:
        raise InvalidParameterError(
            f"{name}: expected {edge_count} entries, got {len(values)}"
        )
    for i, v in enumerate(values):
        if abs(v) >= MAX_COST_MAGNITUDE:
            raise InvalidParameterError(f"{name}[{i}]: magnitude too large")
    return np.array(values, dtype=np.int64)


def check_nonnegative(costs: np.ndarray, name: str = "costs") -> None:
    if costs.size and int(costs.min()) < 0:
        bad = int(np.argmin(costs))
        raise InvalidParameterError(f"{name}[{bad}]: must be non-negative")
