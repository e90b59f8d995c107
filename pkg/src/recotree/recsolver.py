"""Primal-dual solver for the recoverable spanning tree problem.

Given integer first-stage costs ``C`` and second-stage costs ``c`` on the
same graph, find a pair of spanning trees ``(X, Y)`` sharing at least
``L = n-1-k`` edges that minimises ``C(X) + c(Y)``.

The solver maintains a pair of trees together with dual multipliers
``alpha``, ``beta`` (one pair per edge, ``alpha + beta == theta``) such that
``X`` is always a minimum spanning tree under the reduced first-stage costs
and ``Y`` under the reduced second-stage costs.  Each phase either finds an
augmenting path in the *admissible graph* — a directed graph on edge ids
whose arcs encode cost-neutral exchanges — and grows the overlap ``|X∩Y|``
by one, or raises ``theta`` by the smallest amount that makes a new
exchange equality tight.  Termination with overlap ``>= L`` and
``theta * (overlap - L) == 0`` certifies optimality.

All arithmetic is on integers and every tie is broken deterministically
(edge-id order), so equal inputs produce equal outputs, traces included.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from . import kernels
from .errors import InvalidParameterError, SolverInvariantError
from .graph import (
    EdgePartition,
    Graph,
    Tree,
    as_cost_array,
    check_nonnegative,
    is_spanning_tree,
    partition_of,
    tree_parent_arrays,
)
from .mst import check_path_optimality, minimum_spanning_tree

ARC_X = 1
ARC_Y = 2

_LABEL_NAMES = {ARC_X: frozenset({"X"}), ARC_Y: frozenset({"Y"}),
                ARC_X | ARC_Y: frozenset({"X", "Y"})}


@dataclass(frozen=True)
class PairState:
    """Immutable snapshot of the solver: tree pair plus dual information.

    The numpy arrays are treated as read-only; operations return new states
    instead of mutating.  ``first_reduced`` and ``second_reduced`` always
    equal the original costs minus ``alpha`` and ``beta`` respectively.
    """

    graph: Graph
    first_cost: np.ndarray
    second_cost: np.ndarray
    x_tree: Tree
    y_tree: Tree
    partition: EdgePartition
    theta: int
    alpha: np.ndarray
    beta: np.ndarray
    first_reduced: np.ndarray
    second_reduced: np.ndarray
    overlap_target: int

    @property
    def overlap(self) -> int:
        return self.partition.overlap

    def objective(self) -> int:
        """``C(X) + c(Y)`` under the original costs."""
        return self.x_tree.cost(self.first_cost) + self.y_tree.cost(self.second_cost)


@dataclass(frozen=True)
class PairStateCheck:
    """Result of :func:`verify_pair_state`; truthy iff the invariants hold."""

    invariants_ok: bool
    optimal: bool
    problems: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.invariants_ok


@dataclass(frozen=True)
class AdmissibleGraph:
    """Directed graph on edge ids encoding the currently tight exchanges.

    ``tails``/``heads``/``labels`` are parallel arrays sorted by
    ``(tail, head)``; ``labels`` is a bitmask (1 = X-move arc, 2 = Y-move
    arc).  Only arcs between admissible nodes are retained; ``admissible``
    marks the nodes that are in the Y-only class or reachable from it.
    """

    node_count: int
    tails: np.ndarray
    heads: np.ndarray
    labels: np.ndarray
    admissible: np.ndarray

    def admissible_nodes(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.admissible))

    def arc_dict(self) -> dict[tuple[int, int], frozenset[str]]:
        return {
            (int(t), int(h)): _LABEL_NAMES[int(lab)]
            for t, h, lab in zip(self.tails, self.heads, self.labels)
        }


@dataclass(frozen=True)
class AugmentingPath:
    """A fewest-arc admissible path from a Y-only node to an X-only node."""

    nodes: tuple[int, ...]
    labels: tuple[str, ...]
    case: str

    @property
    def arc_count(self) -> int:
        return len(self.labels)


class _Context:
    """Per-phase scratch: tree indices, pair tables and partition masks.

    Valid as long as the trees (and hence the partition) are unchanged;
    dual shifts do not invalidate it.
    """

    __slots__ = (
        "x_member", "y_member", "x_pairs", "y_pairs",
        "x_only_mask", "y_only_mask", "shared_mask", "outside_mask",
    )

    def __init__(self, state: PairState):
        graph = state.graph
        m = graph.edge_count
        eu, ev = graph.endpoint_arrays()
        self.x_member = state.x_tree.member_mask()
        self.y_member = state.y_tree.member_mask()
        self.x_pairs = kernels.pair_table(
            eu, ev, self.x_member, *tree_parent_arrays(state.x_tree)
        )
        self.y_pairs = kernels.pair_table(
            eu, ev, self.y_member, *tree_parent_arrays(state.y_tree)
        )
        self.x_only_mask = np.zeros(m, dtype=bool)
        self.y_only_mask = np.zeros(m, dtype=bool)
        self.shared_mask = np.zeros(m, dtype=bool)
        self.outside_mask = np.zeros(m, dtype=bool)
        part = state.partition
        for e in part.x_only:
            self.x_only_mask[e] = True
        for e in part.y_only:
            self.y_only_mask[e] = True
        for e in part.shared:
            self.shared_mask[e] = True
        for e in part.outside:
            self.outside_mask[e] = True


def initial_pair(graph: Graph, first_costs, second_costs, k: int) -> PairState:
    """Start state: independent minimum spanning trees, all duals zero.

    Raises on a disconnected graph, non-integer costs or ``k`` outside
    ``[0, n-1]``.
    """
    graph.require_connected()
    m = graph.edge_count
    first = as_cost_array(first_costs, m, "first_costs")
    second = as_cost_array(second_costs, m, "second_costs")
    check_nonnegative(first, "first_costs")
    check_nonnegative(second, "second_costs")
    k = int(k)
    if not 0 <= k <= graph.node_count - 1:
        raise InvalidParameterError(
            f"k must be in [0, {graph.node_count - 1}], got {k}"
        )
    x_tree = minimum_spanning_tree(graph, first)
    y_tree = minimum_spanning_tree(graph, second)
    zeros = np.zeros(m, dtype=np.int64)
    return PairState(
        graph=graph,
        first_cost=first,
        second_cost=second,
        x_tree=x_tree,
        y_tree=y_tree,
        partition=partition_of(x_tree, y_tree),
        theta=0,
        alpha=zeros,
        beta=zeros.copy(),
        first_reduced=first.copy(),
        second_reduced=second.copy(),
        overlap_target=graph.node_count - 1 - k,
    )


def _raw_arcs(state: PairState, ctx: _Context) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Tight arcs before pruning, as (tails, heads, x_keys, y_keys)."""
    m = state.graph.edge_count
    x_nt, x_tt = ctx.x_pairs
    fr = state.first_reduced
    tight_x = fr[x_nt] == fr[x_tt]
    y_nt, y_tt = ctx.y_pairs
    sr = state.second_reduced
    tight_y = sr[y_nt] == sr[y_tt]
    # X-move arc: non-tree edge -> path edge.  Y-move arc: path edge -> non-tree edge.
    x_tails, x_heads = x_nt[tight_x], x_tt[tight_x]
    y_tails, y_heads = y_tt[tight_y], y_nt[tight_y]
    tails = np.concatenate([x_tails, y_tails])
    heads = np.concatenate([x_heads, y_heads])
    x_keys = x_tails * m + x_heads
    y_keys = y_tails * m + y_heads
    return tails, heads, x_keys, y_keys


def _admissible_graph(state: PairState, ctx: _Context) -> AdmissibleGraph:
    m = state.graph.edge_count
    tails, heads, x_keys, y_keys = _raw_arcs(state, ctx)
    admissible = kernels.reach_forward(m, tails, heads, ctx.y_only_mask)
    keys = np.unique(np.concatenate([x_keys, y_keys]))
    labels = (
        np.isin(keys, x_keys).astype(np.int64) * ARC_X
        + np.isin(keys, y_keys).astype(np.int64) * ARC_Y
    )
    arc_tails = keys // m
    arc_heads = keys % m
    keep = admissible[arc_tails] & admissible[arc_heads]
    return AdmissibleGraph(
        node_count=m,
        tails=arc_tails[keep],
        heads=arc_heads[keep],
        labels=labels[keep],
        admissible=admissible,
    )


def build_admissible_graph(state: PairState) -> AdmissibleGraph:
    """Construct the admissible graph of a state.

    Step one generates every tight exchange arc: an X-move arc ``e -> f``
    for each non-tree edge ``e`` whose reduced first-stage cost equals that
    of an edge ``f`` on its X-path (applying it would put ``e`` into X and
    drop ``f``), and a Y-move arc ``f -> e`` for the symmetric second-stage
    equality (drop ``f`` from Y, add ``e``).  An arc may carry both labels.
    Step two deletes every node that is neither Y-only nor reachable from a
    Y-only node, together with its incident arcs.
    """
    return _admissible_graph(state, _Context(state))


def _arc_labels_at(ag: AdmissibleGraph, tail: int, head: int) -> int:
    keys = ag.tails * ag.node_count + ag.heads
    idx = int(np.searchsorted(keys, tail * ag.node_count + head))
    if idx >= keys.size or keys[idx] != tail * ag.node_count + head:
        raise SolverInvariantError(f"arc ({tail}, {head}) missing from admissible graph")
    return int(ag.labels[idx])


def find_augmenting_path(
    ag: AdmissibleGraph, partition: EdgePartition
) -> AugmentingPath | None:
    """Fewest-arc path from the Y-only class to the X-only class, or None.

    Runs a breadth-first search from all Y-only nodes simultaneously.  Among
    equal-length paths the lexicographically smallest node sequence is
    returned, so the choice is deterministic.  The path's exchange case is
    classified from its arc labels: a single arc is case 1; longer paths
    starting with an X-move are case 2a/2b (even/odd arc count), starting
    with a Y-move case 3a/3b.
    """
    m = ag.node_count
    targets = np.zeros(m, dtype=bool)
    for e in partition.x_only:
        targets[e] = ag.admissible[e]
    if not targets.any():
        return None
    dist = kernels.bfs_backward(m, ag.tails, ag.heads, targets)
    best = -1
    best_dist = None
    for s in sorted(partition.y_only):
        d = int(dist[s])
        if d >= 0 and (best_dist is None or d < best_dist):
            best, best_dist = s, d
    if best_dist is None:
        # An admissible X-only node is reachable from the Y-only class by
        # construction, so the search must have found a source.
        raise SolverInvariantError("admissible target with no augmenting path")
    nodes = [best]
    cur, remaining = best, best_dist
    while remaining > 0:
        out = ag.heads[ag.tails == cur]
        candidates = out[dist[out] == remaining - 1]
        if candidates.size == 0:
            raise SolverInvariantError("broken shortest-path reconstruction")
        cur = int(candidates.min())
        nodes.append(cur)
        remaining -= 1
    labels = _assign_labels(ag, partition, nodes)
    case = _classify(labels)
    return AugmentingPath(nodes=tuple(nodes), labels=tuple(labels), case=case)


def _assign_labels(
    ag: AdmissibleGraph, partition: EdgePartition, nodes: list[int]
) -> list[str]:
    labels: list[str] = []
    for tail, head in zip(nodes, nodes[1:]):
        available = _arc_labels_at(ag, tail, head)
        if head in partition.shared:
            chosen = ARC_X
        elif head in partition.outside:
            chosen = ARC_Y
        elif tail in partition.shared:
            chosen = ARC_Y
        elif tail in partition.outside:
            chosen = ARC_X
        else:
            # Single arc from a Y-only node straight to an X-only node; both
            # moves may be available and either alone augments.  Prefer the
            # X-move for determinism.
            chosen = ARC_X if available & ARC_X else ARC_Y
        if not available & chosen:
            raise SolverInvariantError(
                f"arc ({tail}, {head}) lacks required label {chosen}"
            )
        labels.append("X" if chosen == ARC_X else "Y")
    return labels


def _classify(labels: list[str]) -> str:
    if len(labels) == 1:
        return "1"
    first, last = labels[0], labels[-1]
    even = len(labels) % 2 == 0
    if first == "X":
        case = "2a" if last == "Y" else "2b"
        parity_ok = even if case == "2a" else not even
    else:
        case = "3a" if last == "X" else "3b"
        parity_ok = even if case == "3a" else not even
    if not parity_ok:
        raise SolverInvariantError(f"path labels {labels} break case parity")
    return case


def augment(state: PairState, path: AugmentingPath) -> PairState:
    """Apply the exchanges along an augmenting path.

    Each X-labelled arc ``(u, w)`` moves ``u`` into X and ``w`` out of it;
    each Y-labelled arc moves ``u`` out of Y and ``w`` into it.  The overlap
    grows by exactly one, both edge sets remain spanning trees (asserted at
    runtime — a failure indicates a solver defect, not bad input), and the
    duals are untouched.
    """
    x_ids = set(state.x_tree.edge_ids)
    y_ids = set(state.y_tree.edge_ids)
    for (u, w), label in zip(zip(path.nodes, path.nodes[1:]), path.labels):
        if label == "X":
            if u in x_ids or w not in x_ids:
                raise SolverInvariantError(f"invalid X-move {u}->{w}")
            x_ids.add(u)
            x_ids.remove(w)
        else:
            if u not in y_ids or w in y_ids:
                raise SolverInvariantError(f"invalid Y-move {u}->{w}")
            y_ids.remove(u)
            y_ids.add(w)
    if not is_spanning_tree(state.graph, x_ids):
        raise SolverInvariantError("augmentation left X a non-tree")
    if not is_spanning_tree(state.graph, y_ids):
        raise SolverInvariantError("augmentation left Y a non-tree")
    new_x = Tree(state.graph, frozenset(x_ids))
    new_y = Tree(state.graph, frozenset(y_ids))
    new_partition = partition_of(new_x, new_y)
    if new_partition.overlap != state.overlap + 1:
        raise SolverInvariantError("augmentation failed to grow the overlap by 1")
    if not new_partition.x_only <= state.partition.x_only:
        raise SolverInvariantError("augmentation enlarged the X-only class")
    if not new_partition.y_only <= state.partition.y_only:
        raise SolverInvariantError("augmentation enlarged the Y-only class")
    return replace(
        state, x_tree=new_x, y_tree=new_y, partition=new_partition
    )


def _next_step_candidates(
    state: PairState, ctx: _Context, admissible: np.ndarray
) -> Iterator[int]:
    x_nt, x_tt = ctx.x_pairs
    sel = admissible[x_nt] & ~admissible[x_tt]
    if sel.any():
        gaps = state.first_reduced[x_nt[sel]] - state.first_reduced[x_tt[sel]]
        yield int(gaps.min())
    y_nt, y_tt = ctx.y_pairs
    sel = ~admissible[y_nt] & admissible[y_tt]
    if sel.any():
        gaps = state.second_reduced[y_nt[sel]] - state.second_reduced[y_tt[sel]]
        yield int(gaps.min())


def _next_dual_step(
    state: PairState, ctx: _Context, admissible: np.ndarray
) -> int | None:
    candidates = list(_next_step_candidates(state, ctx, admissible))
    if not candidates:
        return None
    step = min(candidates)
    if step <= 0:
        raise SolverInvariantError("non-positive boundary gap; admissibility broken")
    return step


def next_dual_step(state: PairState, ag: AdmissibleGraph) -> int | None:
    """Smallest dual shift that makes a new exchange equality tight.

    Scans two families across the admissibility boundary: reduced
    first-stage gaps between an admissible non-X edge and a non-admissible
    edge on its X-path, and reduced second-stage gaps between a
    non-admissible non-Y edge and an admissible edge on its Y-path.
    Returns None when both families are empty.  Every candidate is strictly
    positive (a zero gap would already be a tight arc, contradicting the
    admissibility split).
    """
    return _next_dual_step(state, _Context(state), ag.admissible)


def _apply_shift(state: PairState, delta: int, admissible: np.ndarray) -> PairState:
    first_reduced = state.first_reduced.copy()
    second_reduced = state.second_reduced.copy()
    alpha = state.alpha.copy()
    beta = state.beta.copy()
    first_reduced[admissible] -= delta
    alpha[admissible] += delta
    second_reduced[~admissible] -= delta
    beta[~admissible] += delta
    return replace(
        state,
        theta=state.theta + delta,
        alpha=alpha,
        beta=beta,
        first_reduced=first_reduced,
        second_reduced=second_reduced,
    )


def shift_duals(state: PairState, delta: int) -> PairState:
    """Raise ``theta`` by ``delta``, rebalancing the per-edge duals.

    Admissible nodes take the shift on ``alpha`` (reduced first-stage cost
    drops); all other nodes take it on ``beta``.  ``delta`` may not exceed
    the value of :func:`next_dual_step`, otherwise a reduced-cost
    optimality condition would break; ``delta == 0`` returns an identical
    state.
    """
    delta = int(delta)
    if delta < 0:
        raise InvalidParameterError("delta must be non-negative")
    ctx = _Context(state)
    ag = _admissible_graph(state, ctx)
    candidates = list(_next_step_candidates(state, ctx, ag.admissible))
    if candidates and delta > min(candidates):
        raise InvalidParameterError(
            f"shift {delta} exceeds the smallest boundary gap "
            f"{min(candidates)}; optimality would break"
        )
    return _apply_shift(state, delta, ag.admissible)


def verify_pair_state(state: PairState) -> PairStateCheck:
    """Check every state invariant; also report the optimality flag.

    The invariants: both edge sets are spanning trees consistent with the
    partition; ``theta``, ``alpha``, ``beta`` non-negative with
    ``alpha + beta == theta`` per edge; ``alpha`` vanishes on X-only edges
    and ``beta`` on Y-only edges; the reduced costs equal original minus
    dual; and both trees are exchange-optimal under their reduced costs.
    The optimality flag is true when additionally ``overlap >= L`` and
    ``theta * (overlap - L) == 0``.
    """
    problems: list[str] = []
    graph = state.graph
    if not is_spanning_tree(graph, state.x_tree.edge_ids):
        problems.append("X is not a spanning tree")
    if not is_spanning_tree(graph, state.y_tree.edge_ids):
        problems.append("Y is not a spanning tree")
    expected = partition_of(state.x_tree, state.y_tree)
    if expected != state.partition:
        problems.append("partition inconsistent with the trees")
    if state.theta < 0:
        problems.append("theta negative")
    if int(state.alpha.min(initial=0)) < 0:
        problems.append("negative alpha")
    if int(state.beta.min(initial=0)) < 0:
        problems.append("negative beta")
    if not np.array_equal(state.alpha + state.beta,
                          np.full(graph.edge_count, state.theta, dtype=np.int64)):
        problems.append("alpha + beta != theta somewhere")
    if any(int(state.alpha[e]) != 0 for e in state.partition.x_only):
        problems.append("alpha non-zero on an X-only edge")
    if any(int(state.beta[e]) != 0 for e in state.partition.y_only):
        problems.append("beta non-zero on a Y-only edge")
    if not np.array_equal(state.first_reduced, state.first_cost - state.alpha):
        problems.append("first_reduced != first_cost - alpha")
    if not np.array_equal(state.second_reduced, state.second_cost - state.beta):
        problems.append("second_reduced != second_cost - beta")
    if check_path_optimality(graph, state.x_tree, state.first_reduced):
        problems.append("X not optimal under reduced first-stage costs")
    if check_path_optimality(graph, state.y_tree, state.second_reduced):
        problems.append("Y not optimal under reduced second-stage costs")
    ok = not problems
    optimal = (
        ok
        and state.overlap >= state.overlap_target
        and state.theta * (state.overlap - state.overlap_target) == 0
    )
    return PairStateCheck(invariants_ok=ok, optimal=optimal, problems=tuple(problems))


@dataclass(frozen=True)
class RecSolution:
    """Optimal tree pair with its objective and the final solver state."""

    x_tree: Tree
    y_tree: Tree
    objective: int
    state: PairState


def _arc_key_set(ag: AdmissibleGraph) -> set[int]:
    m = ag.node_count
    return set((ag.tails * m + ag.heads).tolist())


def solve_recoverable(
    graph: Graph,
    first_costs,
    second_costs,
    k: int,
    *,
    trace: list | None = None,
    validate: bool = False,
) -> RecSolution:
    """Solve the recoverable spanning tree problem exactly.

    Returns spanning trees ``X`` and ``Y`` with ``|X ∩ Y| >= n-1-k``
    minimising ``C(X) + c(Y)``; the objective is reported under the
    original costs.  Runs in strongly polynomial time: each of the at most
    ``L`` phases performs at most ``m`` dual shifts of cost O(nm) each.

    ``trace``, when a list, receives one dict per event (phase start, dual
    shift, augmentation, final summary) — the stream is deterministic.
    ``validate`` re-checks every state invariant after every step and is
    intended for testing; it slows the solve down considerably.
    """
    state = initial_pair(graph, first_costs, second_costs, k)
    if validate:
        _require_valid(state)
    ctx: _Context | None = None
    shifts_in_phase = 0
    prev_arcs: set[int] | None = None
    prev_admissible_count = 0
    m = graph.edge_count
    while state.overlap < state.overlap_target:
        if ctx is None:
            ctx = _Context(state)
            shifts_in_phase = 0
            prev_arcs = None
            if trace is not None:
                trace.append({
                    "event": "phase",
                    "overlap": state.overlap,
                    "target": state.overlap_target,
                    "theta": state.theta,
                })
        ag = _admissible_graph(state, ctx)
        if validate and prev_arcs is not None:
            arcs_now = _arc_key_set(ag)
            if not prev_arcs <= arcs_now:
                raise SolverInvariantError("a dual shift removed an admissible arc")
            if int(ag.admissible.sum()) <= prev_admissible_count:
                raise SolverInvariantError("a dual shift admitted no new node")
        path = find_augmenting_path(ag, state.partition)
        if path is not None:
            state = augment(state, path)
            if validate:
                _require_valid(state)
            if trace is not None:
                trace.append({
                    "event": "augment",
                    "case": path.case,
                    "length": path.arc_count,
                    "overlap": state.overlap,
                })
            ctx = None
            continue
        step = _next_dual_step(state, ctx, ag.admissible)
        if step is None:
            # Unreachable on connected graphs; a missing step here would
            # stall the solver, so treat it as a defect.
            raise SolverInvariantError(
                "no augmenting path and no dual step while below the overlap target"
            )
        shifts_in_phase += 1
        if shifts_in_phase > m:
            raise SolverInvariantError("phase exceeded the m-shift bound")
        if validate:
            prev_arcs = _arc_key_set(ag)
            prev_admissible_count = int(ag.admissible.sum())
        state = _apply_shift(state, step, ag.admissible)
        if validate:
            _require_valid(state)
        if trace is not None:
            trace.append({"event": "shift", "delta": step, "theta": state.theta})
    if validate:
        check = verify_pair_state(state)
        if not check.optimal:
            raise SolverInvariantError(
                f"terminal state fails the optimality check: {check.problems}"
            )
    objective = state.objective()
    if trace is not None:
        trace.append({
            "event": "done",
            "overlap": state.overlap,
            "theta": state.theta,
            "objective": objective,
        })
    return RecSolution(
        x_tree=state.x_tree,
        y_tree=state.y_tree,
        objective=objective,
        state=state,
    )


def _require_valid(state: PairState) -> None:
    check = verify_pair_state(state)
    if not check:
        raise SolverInvariantError(
            "state invariant violation: " + "; ".join(check.problems)
        )
