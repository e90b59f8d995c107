"""Brute-force ground truth for the fast solvers.

Everything here trades speed for certainty: spanning trees are enumerated
explicitly (contraction-deletion with connectivity pruning), worst cases
are maximised over explicit scenario sets, and the one linear program in
the package runs on exact rationals.  Hard work caps make every routine
refuse loudly instead of running unbounded or approximating silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    OracleCapExceeded,
    SolverInvariantError,
    UnboundedProgramError,
)
from .graph import Graph, Tree, UnionFind
from .incsolver import solve_incremental
from .instances import (
    MODEL_CONTINUOUS,
    MODEL_DISCRETE,
    MODEL_INTERVAL,
    RobustInstance,
)


@dataclass(frozen=True)
class OracleCaps:
    """Work limits; exceeding any of them raises :class:`OracleCapExceeded`."""

    max_trees: int = 10**6
    max_pairs: int = 2 * 10**7
    max_subsets: int = 200_000
    max_cuts: int = 500
    max_lp_rows: int = 2000
    max_lp_pivots: int = 50_000


DEFAULT_CAPS = OracleCaps()


# ---------------------------------------------------------------------------
# Spanning-tree enumeration


def spanning_tree_count(graph: Graph) -> int:
    """Number of spanning trees via the matrix-tree theorem.

    Uses an integer fraction-free (Bareiss) determinant of a Laplacian
    minor, so the count is exact for any size.
    """
    graph.require_connected()
    n = graph.node_count
    if n == 1:
        return 1
    lap = [[0] * n for _ in range(n)]
    for u, v in graph.edges:
        lap[u][u] += 1
        lap[v][v] += 1
        lap[u][v] -= 1
        lap[v][u] -= 1
    a = [row[1:] for row in lap[1:]]
    size = n - 1
    sign = 1
    prev = 1
    for col in range(size - 1):
        if a[col][col] == 0:
            swap = next(
                (r for r in range(col + 1, size) if a[r][col] != 0), None
            )
            if swap is None:
                return 0
            a[col], a[swap] = a[swap], a[col]
            sign = -sign
        for r in range(col + 1, size):
            for cc in range(col + 1, size):
                a[r][cc] = (a[r][cc] * a[col][col] - a[r][col] * a[col][cc]) // prev
            a[r][col] = 0
        prev = a[col][col]
    return sign * a[size - 1][size - 1]


def enumerate_spanning_trees(
    graph: Graph, caps: OracleCaps = DEFAULT_CAPS
) -> Iterator[frozenset[int]]:
    """Yield every spanning tree exactly once, in a deterministic order.

    Classic contraction-deletion on the smallest-id edge: the branch that
    keeps the edge is explored first, and the deletion branch is pruned
    whenever removing the edge disconnects the remaining graph.  Refuses
    up front (via the exact Kirchhoff count) when the graph has more than
    ``caps.max_trees`` trees.
    """
    total = spanning_tree_count(graph)
    if total > caps.max_trees:
        raise OracleCapExceeded(
            f"{total} spanning trees exceed the cap of {caps.max_trees}"
        )

    def connected(edge_list: list[tuple[int, int, int]], labels: set[int]) -> bool:
        if len(labels) == 1:
            return True
        uf = {x: x for x in labels}

        def find(x: int) -> int:
            while uf[x] != x:
                uf[x] = uf[uf[x]]
                x = uf[x]
            return x

        parts = len(labels)
        for _, a, b in edge_list:
            ra, rb = find(a), find(b)
            if ra != rb:
                uf[ra] = rb
                parts -= 1
                if parts == 1:
                    return True
        return parts == 1

    def recurse(
        edge_list: list[tuple[int, int, int]], labels: set[int], chosen: list[int]
    ) -> Iterator[frozenset[int]]:
        if len(labels) == 1:
            yield frozenset(chosen)
            return
        eid, u, v = edge_list[0]
        # Keep the edge: contract v into u, dropping resulting self-loops.
        contracted = []
        for fid, a, b in edge_list[1:]:
            a2 = u if a == v else a
            b2 = u if b == v else b
            if a2 != b2:
                contracted.append((fid, a2, b2))
        chosen.append(eid)
        yield from recurse(contracted, labels - {v}, chosen)
        chosen.pop()
        # Drop the edge, unless that disconnects the rest.
        rest = edge_list[1:]
        if connected(rest, labels):
            yield from recurse(rest, labels, chosen)

    edge_list = [(i, u, v) for i, (u, v) in enumerate(graph.edges)]
    yield from recurse(edge_list, set(range(graph.node_count)), [])


# ---------------------------------------------------------------------------
# Pair enumeration for the recoverable problem

_POPCOUNT_LUT: np.ndarray | None = None


def _popcount64(values: np.ndarray) -> np.ndarray:
    global _POPCOUNT_LUT
    if _POPCOUNT_LUT is None:
        _POPCOUNT_LUT = np.array(
            [bin(i).count("1") for i in range(1 << 16)], dtype=np.int64
        )
    lut = _POPCOUNT_LUT
    return (
        lut[values & 0xFFFF]
        + lut[(values >> 16) & 0xFFFF]
        + lut[(values >> 32) & 0xFFFF]
        + lut[(values >> 48) & 0xFFFF]
    )


def _tree_masks(trees: list[frozenset[int]], edge_count: int) -> np.ndarray:
    if edge_count > 62:
        raise OracleCapExceeded("more than 62 edges; oracle pair tables refuse")
    return np.array([sum(1 << e for e in t) for t in trees], dtype=np.int64)


@dataclass
class PairEnumeration:
    """All spanning trees with pairwise overlaps and pair costs, tabulated."""

    trees: list[frozenset[int]]
    overlap: np.ndarray  # T x T intersection sizes
    total: np.ndarray  # T x T values C(X_i) + c(Y_j)

    def best(self, min_overlap: int) -> tuple[frozenset[int], frozenset[int], int]:
        """Cheapest pair with at least the given overlap (first-found ties)."""
        feasible = self.overlap >= min_overlap
        if not feasible.any():
            raise SolverInvariantError("no feasible pair; overlap demand too high")
        sentinel = np.iinfo(np.int64).max
        masked = np.where(feasible, self.total, sentinel)
        flat = int(np.argmin(masked))
        i, j = divmod(flat, len(self.trees))
        return self.trees[i], self.trees[j], int(masked[i, j])


def enumerate_pairs(
    graph: Graph, first_costs, second_costs, caps: OracleCaps = DEFAULT_CAPS
) -> PairEnumeration:
    trees = list(enumerate_spanning_trees(graph, caps))
    if len(trees) ** 2 > caps.max_pairs:
        raise OracleCapExceeded(
            f"{len(trees)}^2 tree pairs exceed the cap of {caps.max_pairs}"
        )
    masks = _tree_masks(trees, graph.edge_count)
    first = [int(v) for v in first_costs]
    second = [int(v) for v in second_costs]
    cost_x = np.array([sum(first[e] for e in t) for t in trees], dtype=np.int64)
    cost_y = np.array([sum(second[e] for e in t) for t in trees], dtype=np.int64)
    overlap = _popcount64(np.bitwise_and.outer(masks, masks))
    total = cost_x[:, None] + cost_y[None, :]
    return PairEnumeration(trees=trees, overlap=overlap, total=total)


@dataclass(frozen=True)
class BruteRecResult:
    x_ids: frozenset[int]
    y_ids: frozenset[int]
    objective: int


def brute_force_recoverable(
    graph: Graph, first_costs, second_costs, k: int, caps: OracleCaps = DEFAULT_CAPS
) -> BruteRecResult:
    """Exact recoverable-spanning-tree optimum by enumerating all tree pairs."""
    n = graph.node_count
    k = int(k)
    if not 0 <= k <= n - 1:
        raise InvalidParameterError(f"k must be in [0, {n - 1}], got {k}")
    pairs = enumerate_pairs(graph, first_costs, second_costs, caps)
    x_ids, y_ids, objective = pairs.best(n - 1 - k)
    return BruteRecResult(x_ids=x_ids, y_ids=y_ids, objective=objective)


# ---------------------------------------------------------------------------
# Exact rational simplex (dense tableau, Bland's rule)


def rational_simplex_max(
    objective: Sequence[Fraction],
    rows: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
    caps: OracleCaps = DEFAULT_CAPS,
) -> tuple[Fraction, list[Fraction]]:
    """Maximise ``objective . x`` subject to ``rows . x <= rhs``, ``x >= 0``.

    Requires ``rhs >= 0`` so the all-slack basis is feasible (every program
    built in this module satisfies that).  All arithmetic is on
    :class:`fractions.Fraction`; Bland's smallest-index rule prevents
    cycling.  Raises :class:`UnboundedProgramError` on an unbounded program
    and :class:`OracleCapExceeded` if the pivot cap is hit.
    """
    var_count = len(objective)
    row_count = len(rows)
    if row_count > caps.max_lp_rows:
        raise OracleCapExceeded(f"{row_count} LP rows exceed {caps.max_lp_rows}")
    b = [Fraction(v) for v in rhs]
    if any(v < 0 for v in b):
        raise InvalidParameterError("simplex requires non-negative right-hand sides")
    width = var_count + row_count
    tableau = []
    for i, row in enumerate(rows):
        line = [Fraction(v) for v in row]
        line.extend(Fraction(1 if j == i else 0) for j in range(row_count))
        tableau.append(line)
    cost = [Fraction(v) for v in objective] + [Fraction(0)] * row_count
    reduced = [-v for v in cost]
    basis = [var_count + i for i in range(row_count)]
    for _ in range(caps.max_lp_pivots):
        enter = next((j for j in range(width) if reduced[j] < 0), None)
        if enter is None:
            x = [Fraction(0)] * var_count
            for i, bv in enumerate(basis):
                if bv < var_count:
                    x[bv] = b[i]
            value = sum(
                (objective[j] * x[j] for j in range(var_count)), Fraction(0)
            )
            return value, x
        pivot_row = None
        pivot_ratio = None
        for i in range(row_count):
            a = tableau[i][enter]
            if a > 0:
                ratio = b[i] / a
                if (
                    pivot_ratio is None
                    or ratio < pivot_ratio
                    or (ratio == pivot_ratio and basis[i] < basis[pivot_row])
                ):
                    pivot_row, pivot_ratio = i, ratio
        if pivot_row is None:
            raise UnboundedProgramError("LP is unbounded")
        pr = tableau[pivot_row]
        pv = pr[enter]
        for j in range(width):
            pr[j] /= pv
        b[pivot_row] /= pv
        for i in range(row_count):
            if i == pivot_row:
                continue
            factor = tableau[i][enter]
            if factor:
                line = tableau[i]
                for j in range(width):
                    line[j] -= factor * pr[j]
                b[i] -= factor * b[pivot_row]
        factor = reduced[enter]
        if factor:
            for j in range(width):
                reduced[j] -= factor * pr[j]
        basis[pivot_row] = enter
    raise OracleCapExceeded("simplex pivot cap exceeded")


# ---------------------------------------------------------------------------
# Adversarial (worst-case) recovery values per uncertainty model


def _tree_ids(x) -> frozenset[int]:
    if isinstance(x, Tree):
        return x.edge_ids
    return frozenset(int(e) for e in x)


def _as_value(value: Fraction):
    return int(value) if value.denominator == 1 else value


def _feasible_recovery_costs(
    inst: RobustInstance,
    x_ids: frozenset[int],
    caps: OracleCaps,
) -> tuple[list[frozenset[int]], np.ndarray, np.ndarray]:
    """Feasible recovery trees with membership matrix and nominal costs."""
    graph = inst.graph
    trees = list(enumerate_spanning_trees(graph, caps))
    keep = [t for t in trees if len(t & x_ids) >= inst.overlap_target]
    member = np.zeros((len(keep), graph.edge_count), dtype=np.int64)
    for i, t in enumerate(keep):
        for e in t:
            member[i, e] = 1
    nominal = member @ inst.second_cost
    return keep, member, nominal


def _adversary_discrete(
    inst: RobustInstance, x_ids: frozenset[int], gamma: int, caps: OracleCaps
) -> int:
    deviating = [e for e in range(inst.graph.edge_count) if int(inst.deviation[e]) > 0]
    size = min(gamma, len(deviating))
    if math.comb(len(deviating), size) > caps.max_subsets:
        raise OracleCapExceeded("too many deviation subsets to enumerate")
    keep, member, nominal = _feasible_recovery_costs(inst, x_ids, caps)
    dev = inst.deviation
    best = None
    # Raising more edges never lowers any tree's cost, so only subsets of
    # maximal size need to be considered.
    for subset in combinations(deviating, size):
        if subset:
            idx = list(subset)
            costs = nominal + member[:, idx] @ dev[idx]
        else:
            costs = nominal
        inner = int(costs.min())
        if best is None or inner > best:
            best = inner
    if best is None:
        raise SolverInvariantError("no subsets enumerated")
    return best


def _continuous_lp_parts(
    inst: RobustInstance, gamma: int
) -> tuple[np.ndarray, int]:
    capped = np.minimum(inst.deviation, gamma)
    return capped, int(gamma)


def _lp_rows_for_tree(
    tree_ids: frozenset[int], second_cost: np.ndarray, edge_count: int
) -> tuple[list[Fraction], Fraction]:
    row = [Fraction(1)] + [
        Fraction(-1 if e in tree_ids else 0) for e in range(edge_count)
    ]
    rhs = Fraction(sum(int(second_cost[e]) for e in tree_ids))
    return row, rhs


def _continuous_lp(
    inst: RobustInstance,
    gamma: int,
    pool: list[frozenset[int]],
    capped: np.ndarray,
    caps: OracleCaps,
) -> tuple[Fraction, list[Fraction]]:
    m = inst.graph.edge_count
    objective = [Fraction(1)] + [Fraction(0)] * m
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for tree_ids in pool:
        row, r = _lp_rows_for_tree(tree_ids, inst.second_cost, m)
        rows.append(row)
        rhs.append(r)
    for e in range(m):
        bound = [Fraction(0)] * (m + 1)
        bound[1 + e] = Fraction(1)
        rows.append(bound)
        rhs.append(Fraction(int(capped[e])))
    rows.append([Fraction(0)] + [Fraction(1)] * m)
    rhs.append(Fraction(gamma))
    value, x = rational_simplex_max(objective, rows, rhs, caps)
    return value, x[1:]


def adversary_value_cutting(
    x, inst: RobustInstance, gamma: int | None = None, caps: OracleCaps = DEFAULT_CAPS
) -> Fraction:
    """Worst-case optimal recovery cost under the continuous budget model.

    Epigraph LP solved by cutting planes: maximise ``t`` subject to
    ``t <= cost_of(Y, c + delta)`` for every feasible recovery tree ``Y``,
    with per-edge bounds ``0 <= delta <= d`` and total budget
    ``sum(delta) <= gamma``.  The separation step finds the currently
    cheapest recovery tree under ``c + delta`` (an incremental-tree solve
    on rationals scaled to integers) and adds it as a new constraint until
    no tree is violated.  Exact; every iterate is rational.
    """
    x_ids = _tree_ids(x)
    gamma = inst.gamma if gamma is None else int(gamma)
    capped, gamma = _continuous_lp_parts(inst, gamma)
    graph = inst.graph
    base = Tree(graph, x_ids)
    pool: list[frozenset[int]] = [x_ids]
    seen = {x_ids}
    for _ in range(caps.max_cuts):
        value, delta = _continuous_lp(inst, gamma, pool, capped, caps)
        scale = math.lcm(*(f.denominator for f in delta)) if delta else 1
        scaled_costs = [
            scale * int(inst.second_cost[e]) + int(scale * delta[e])
            for e in range(graph.edge_count)
        ]
        inc = solve_incremental(graph, scaled_costs, base, inst.k)
        separation = Fraction(inc.cost, scale)
        if separation >= value:
            return value
        ids = inc.tree.edge_ids
        if ids in seen:
            raise SolverInvariantError("cutting plane repeated a tree constraint")
        seen.add(ids)
        pool.append(ids)
    raise OracleCapExceeded("cutting-plane iteration cap exceeded")


def adversary_value_full_lp(
    x, inst: RobustInstance, gamma: int | None = None, caps: OracleCaps = DEFAULT_CAPS
) -> Fraction:
    """Same value as :func:`adversary_value_cutting` with all constraints up
    front (every feasible recovery tree); used as a cross-check."""
    x_ids = _tree_ids(x)
    gamma = inst.gamma if gamma is None else int(gamma)
    capped, gamma = _continuous_lp_parts(inst, gamma)
    keep, _, _ = _feasible_recovery_costs(inst, x_ids, caps)
    value, _ = _continuous_lp(inst, gamma, keep, capped, caps)
    return value


def brute_force_robust_value(
    x, inst: RobustInstance, gamma: int | None = None, caps: OracleCaps = DEFAULT_CAPS
):
    """Exact worst-case total cost of committing to first-stage tree ``x``.

    Interval: single worst scenario (all deviations up), inner minimum by
    tree enumeration.  Discrete budget: maximise over deviation subsets.
    Continuous budget: cutting-plane LP.  Returns an int when the value is
    integral, otherwise a :class:`~fractions.Fraction` (possible only in
    the continuous model).
    """
    x_ids = _tree_ids(x)
    gamma = inst.gamma if gamma is None else int(gamma)
    if gamma < 0:
        raise InvalidParameterError("gamma must be non-negative")
    first_stage = sum(int(inst.first_cost[e]) for e in x_ids)
    if inst.model == MODEL_INTERVAL:
        _, member, _ = _feasible_recovery_costs(inst, x_ids, caps)
        worst = member @ (inst.second_cost + inst.deviation)
        return first_stage + int(worst.min())
    if inst.model == MODEL_DISCRETE:
        return first_stage + _adversary_discrete(inst, x_ids, gamma, caps)
    if inst.model == MODEL_CONTINUOUS:
        return _as_value(first_stage + adversary_value_cutting(x, inst, gamma, caps))
    raise InvalidParameterError(f"unknown model {inst.model!r}")


def brute_force_robust(
    inst: RobustInstance, gamma: int | None = None, caps: OracleCaps = DEFAULT_CAPS
) -> tuple[frozenset[int], int | Fraction]:
    """Exact minimiser of the worst-case total over all first-stage trees.

    For the budget models, candidates are evaluated in increasing order of
    a cheap lower bound (first stage plus nominal inner minimum) so the
    expensive per-tree evaluation runs only while the bound can still beat
    the incumbent.
    """
    gamma = inst.gamma if gamma is None else int(gamma)
    graph = inst.graph
    trees = list(enumerate_spanning_trees(graph, caps))
    first = [sum(int(inst.first_cost[e]) for e in t) for t in trees]
    if inst.model == MODEL_INTERVAL:
        pairs = enumerate_pairs(
            graph, inst.first_cost, inst.second_cost + inst.deviation, caps
        )
        L = inst.overlap_target
        sentinel = np.iinfo(np.int64).max
        masked = np.where(pairs.overlap >= L, pairs.total, sentinel)
        inner = masked.min(axis=1)
        best_i = int(np.argmin(inner))
        return pairs.trees[best_i], int(inner[best_i])
    masks = _tree_masks(trees, graph.edge_count)
    overlap = _popcount64(np.bitwise_and.outer(masks, masks))
    nominal = np.array(
        [sum(int(inst.second_cost[e]) for e in t) for t in trees], dtype=np.int64
    )
    L = inst.overlap_target
    sentinel = np.iinfo(np.int64).max
    inner_nominal = np.where(overlap >= L, nominal[None, :], sentinel).min(axis=1)
    bounds = [(first[i] + int(inner_nominal[i]), i) for i in range(len(trees))]
    bounds.sort()
    best_value: int | Fraction | None = None
    best_tree: frozenset[int] | None = None
    for bound, i in bounds:
        if best_value is not None and bound >= best_value:
            break
        value = brute_force_robust_value(trees[i], inst, gamma, caps)
        if best_value is None or value < best_value:
            best_value, best_tree = value, trees[i]
    if best_tree is None:
        raise SolverInvariantError("no spanning trees enumerated")
    return best_tree, best_value
