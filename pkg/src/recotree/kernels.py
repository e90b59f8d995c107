"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled backend (:mod:`recotree._speedups`, built from Cython) is used
when it imported successfully; otherwise the numpy-based fallback in
:mod:`recotree._kernels_py` takes over.  Both produce bit-identical outputs.
Set the environment variable ``RECOTREE_BACKEND`` to ``pure`` or
``compiled`` to force a choice at import time, or call :func:`set_backend`
at runtime (used by the benchmark to compare the two).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from .errors import InvalidParameterError

try:
    from . import _speedups as _ext
except ImportError:  # pragma: no cover - depends on the build
    _ext = None


def available_backends() -> tuple[str, ...]:
    return ("pure", "compiled") if _ext is not None else ("pure",)


def _initial_backend() -> str:
    forced = os.environ.get("RECOTREE_BACKEND")
    if forced:
        if forced not in ("pure", "compiled"):
            raise InvalidParameterError(
                f"RECOTREE_BACKEND must be 'pure' or 'compiled', not {forced!r}"
            )
        if forced == "compiled" and _ext is None:
            raise InvalidParameterError(
                "RECOTREE_BACKEND=compiled but the extension is not available"
            )
        return forced
    return "compiled" if _ext is not None else "pure"


_active = _initial_backend()


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    """Switch kernel backend at runtime; raises if it is not available."""
    global _active
    if name not in available_backends():
        raise InvalidParameterError(f"backend {name!r} is not available")
    _active = name


def pair_table(
    eu: np.ndarray,
    ev: np.ndarray,
    in_tree: np.ndarray,
    parent_node: np.ndarray,
    parent_edge: np.ndarray,
    depth: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """All (non-tree edge, tree-path edge) pairs; see the pure backend docs."""
    if _active == "pure":
        return _kernels_py.pair_table(eu, ev, in_tree, parent_node, parent_edge, depth)
    m = eu.shape[0]
    lengths = np.zeros(m + 1, dtype=np.int64)
    _ext.path_lengths(eu, ev, in_tree.view(np.uint8), parent_node, depth, lengths)
    offsets = np.cumsum(lengths)
    total = int(offsets[-1])
    out_nt = np.empty(total, dtype=np.int64)
    out_tt = np.empty(total, dtype=np.int64)
    _ext.fill_pairs(
        eu, ev, in_tree.view(np.uint8), parent_node, parent_edge, depth,
        offsets, out_nt, out_tt,
    )
    return out_nt, out_tt


def reach_forward(
    node_count: int,
    tails: np.ndarray,
    heads: np.ndarray,
    seed: np.ndarray,
) -> np.ndarray:
    """Boolean mask of nodes reachable from the seed set along the arcs."""
    if _active == "pure" or tails.size == 0:
        return _kernels_py.reach_forward(node_count, tails, heads, seed)
    reached = seed.copy()
    block_end = np.empty(node_count + 1, dtype=np.int64)
    csr = np.empty(tails.size, dtype=np.int64)
    queue = np.empty(node_count, dtype=np.int64)
    _ext.reach_forward(
        node_count, tails, heads, reached.view(np.uint8), block_end, csr, queue
    )
    return reached


def bfs_backward(
    node_count: int,
    tails: np.ndarray,
    heads: np.ndarray,
    target: np.ndarray,
) -> np.ndarray:
    """Arc-count distance from every node to the target set (-1 = unreachable)."""
    if _active == "pure" or tails.size == 0:
        return _kernels_py.bfs_backward(node_count, tails, heads, target)
    dist = np.full(node_count, -1, dtype=np.int64)
    dist[target] = 0
    block_end = np.empty(node_count + 1, dtype=np.int64)
    csr = np.empty(tails.size, dtype=np.int64)
    queue = np.empty(node_count, dtype=np.int64)
    _ext.bfs_backward(node_count, tails, heads, dist, block_end, csr, queue)
    return dist
