# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: tree path-pair enumeration and arc-graph searches.

The Python wrapper in :mod:`recotree.kernels` allocates all output and
scratch arrays and passes them in as typed memoryviews, so this module has
no dependency on the numpy C API.
"""

ctypedef long long i64


def path_lengths(
    const i64[::1] eu,
    const i64[::1] ev,
    const unsigned char[::1] in_tree,
    const i64[::1] parent_node,
    const i64[::1] depth,
    i64[::1] out_len,
):
    """Write the tree-path length of every non-tree edge into out_len[e+1]."""
    cdef Py_ssize_t m = eu.shape[0]
    cdef Py_ssize_t e
    cdef i64 a, b
    for e in range(m):
        if in_tree[e]:
            out_len[e + 1] = 0
            continue
        a = eu[e]
        b = ev[e]
        while depth[a] > depth[b]:
            a = parent_node[a]
        while depth[b] > depth[a]:
            b = parent_node[b]
        while a != b:
            a = parent_node[a]
            b = parent_node[b]
        out_len[e + 1] = depth[eu[e]] + depth[ev[e]] - 2 * depth[a]


def fill_pairs(
    const i64[::1] eu,
    const i64[::1] ev,
    const unsigned char[::1] in_tree,
    const i64[::1] parent_node,
    const i64[::1] parent_edge,
    const i64[::1] depth,
    const i64[::1] offsets,
    i64[::1] out_nontree,
    i64[::1] out_treeedge,
):
    """Fill the pair table given per-edge segment offsets (prefix sums)."""
    cdef Py_ssize_t m = eu.shape[0]
    cdef Py_ssize_t e
    cdef i64 a, b, i, j
    for e in range(m):
        if in_tree[e]:
            continue
        i = offsets[e]
        j = offsets[e + 1] - 1
        a = eu[e]
        b = ev[e]
        while depth[a] > depth[b]:
            out_nontree[i] = e
            out_treeedge[i] = parent_edge[a]
            a = parent_node[a]
            i += 1
        while depth[b] > depth[a]:
            out_nontree[j] = e
            out_treeedge[j] = parent_edge[b]
            b = parent_node[b]
            j -= 1
        while a != b:
            out_nontree[i] = e
            out_treeedge[i] = parent_edge[a]
            a = parent_node[a]
            i += 1
            out_nontree[j] = e
            out_treeedge[j] = parent_edge[b]
            b = parent_node[b]
            j -= 1


def reach_forward(
    Py_ssize_t node_count,
    const i64[::1] tails,
    const i64[::1] heads,
    unsigned char[::1] reached,
    i64[::1] block_end,
    i64[::1] csr_heads,
    i64[::1] queue,
):
    """Breadth-first reachability; ``reached`` holds the seeds on entry.

    ``block_end`` (size node_count+1), ``csr_heads`` (size len(tails)) and
    ``queue`` (size node_count) are caller-provided scratch.
    """
    cdef Py_ssize_t arc_count = tails.shape[0]
    cdef Py_ssize_t i, qh, qt
    cdef i64 v, w, pos, start, stop
    for i in range(node_count + 1):
        block_end[i] = 0
    for i in range(arc_count):
        block_end[tails[i] + 1] += 1
    for i in range(node_count):
        block_end[i + 1] += block_end[i]
    for i in range(arc_count):
        pos = block_end[tails[i]]
        csr_heads[pos] = heads[i]
        block_end[tails[i]] += 1
    # block for node v is csr_heads[(v == 0 ? 0 : block_end[v-1]) : block_end[v]]
    qh = 0
    qt = 0
    for i in range(node_count):
        if reached[i]:
            queue[qt] = i
            qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        start = block_end[v - 1] if v > 0 else 0
        stop = block_end[v]
        for i in range(start, stop):
            w = csr_heads[i]
            if not reached[w]:
                reached[w] = 1
                queue[qt] = w
                qt += 1


def bfs_backward(
    Py_ssize_t node_count,
    const i64[::1] tails,
    const i64[::1] heads,
    i64[::1] dist,
    i64[::1] block_end,
    i64[::1] csr_tails,
    i64[::1] queue,
):
    """Level search from the target set against arc direction.

    ``dist`` must hold 0 at target nodes and -1 elsewhere on entry.
    """
    cdef Py_ssize_t arc_count = tails.shape[0]
    cdef Py_ssize_t i, qh, qt
    cdef i64 v, w, pos, start, stop
    for i in range(node_count + 1):
        block_end[i] = 0
    for i in range(arc_count):
        block_end[heads[i] + 1] += 1
    for i in range(node_count):
        block_end[i + 1] += block_end[i]
    for i in range(arc_count):
        pos = block_end[heads[i]]
        csr_tails[pos] = tails[i]
        block_end[heads[i]] += 1
    qh = 0
    qt = 0
    for i in range(node_count):
        if dist[i] == 0:
            queue[qt] = i
            qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        start = block_end[v - 1] if v > 0 else 0
        stop = block_end[v]
        for i in range(start, stop):
            w = csr_tails[i]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue[qt] = w
                qt += 1
