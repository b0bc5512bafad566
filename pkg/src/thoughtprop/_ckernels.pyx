# cython: language_level=3
"""Compiled graph kernels; see ``_pykernels`` for the reference semantics."""

from libc.stdlib cimport free, malloc


cdef struct Csr:
    int n
    int *offsets
    int *targets
    int *weights


cdef int _build(Csr *g, int n, list us, list vs, list ws) except -1:
    cdef int m = len(us)
    cdef int i, j, k, u, v, tv, tw
    cdef int *fill
    g.n = n
    g.offsets = <int *> malloc((n + 1) * sizeof(int))
    g.targets = <int *> malloc((2 * m + 1) * sizeof(int))
    g.weights = <int *> malloc((2 * m + 1) * sizeof(int))
    fill = <int *> malloc((n + 1) * sizeof(int))
    if not g.offsets or not g.targets or not g.weights or not fill:
        free(fill)
        raise MemoryError()
    for i in range(n + 1):
        g.offsets[i] = 0
    for i in range(m):
        g.offsets[<int> us[i] + 1] += 1
        g.offsets[<int> vs[i] + 1] += 1
    for i in range(n):
        g.offsets[i + 1] += g.offsets[i]
    for i in range(n):
        fill[i] = g.offsets[i]
    for i in range(m):
        u = us[i]
        v = vs[i]
        g.targets[fill[u]] = v
        g.weights[fill[u]] = ws[i]
        fill[u] += 1
        g.targets[fill[v]] = u
        g.weights[fill[v]] = ws[i]
        fill[v] += 1
    free(fill)
    # insertion sort each row by neighbour index; rows are short
    for i in range(n):
        for j in range(g.offsets[i] + 1, g.offsets[i + 1]):
            tv = g.targets[j]
            tw = g.weights[j]
            k = j - 1
            while k >= g.offsets[i] and g.targets[k] > tv:
                g.targets[k + 1] = g.targets[k]
                g.weights[k + 1] = g.weights[k]
                k -= 1
            g.targets[k + 1] = tv
            g.weights[k + 1] = tw
    return 0


cdef void _release(Csr *g):
    free(g.offsets)
    free(g.targets)
    free(g.weights)


def dijkstra(int n, list us, list vs, list ws, int source):
    cdef Csr g
    cdef long long *dist
    cdef char *done
    cdef int i, j, u, v
    cdef long long best
    _build(&g, n, us, vs, ws)
    dist = <long long *> malloc(n * sizeof(long long))
    done = <char *> malloc(n * sizeof(char))
    try:
        for i in range(n):
            dist[i] = -1
            done[i] = 0
        dist[source] = 0
        # dense selection: O(n^2), fine for the graph sizes this package targets
        while True:
            u = -1
            best = -1
            for i in range(n):
                if not done[i] and dist[i] >= 0 and (best < 0 or dist[i] < best):
                    best = dist[i]
                    u = i
            if u < 0:
                break
            done[u] = 1
            for j in range(g.offsets[u], g.offsets[u + 1]):
                v = g.targets[j]
                if dist[v] < 0 or dist[u] + g.weights[j] < dist[v]:
                    dist[v] = dist[u] + g.weights[j]
        pred = [-1] * n
        for v in range(n):
            if v == source or dist[v] < 0:
                continue
            for j in range(g.offsets[v], g.offsets[v + 1]):
                u = g.targets[j]
                if dist[u] >= 0 and dist[u] + g.weights[j] == dist[v]:
                    pred[v] = u
                    break
        return [dist[i] for i in range(n)], pred
    finally:
        free(dist)
        free(done)
        _release(&g)


cdef struct Search:
    Csr *g
    int target
    long long floor
    long long best
    int depth
    int best_depth
    int *path
    int *best_path
    char *on_path


cdef void _visit(Search *s, int u, long long length) noexcept:
    cdef int j, v
    if s.best >= 0 and length >= s.best:
        return
    if u == s.target:
        if length > s.floor:
            s.best = length
            s.best_depth = s.depth
            for j in range(s.depth):
                s.best_path[j] = s.path[j]
        return
    for j in range(s.g.offsets[u], s.g.offsets[u + 1]):
        v = s.g.targets[j]
        if s.on_path[v]:
            continue
        s.on_path[v] = 1
        s.path[s.depth] = v
        s.depth += 1
        _visit(s, v, length + s.g.weights[j])
        s.depth -= 1
        s.on_path[v] = 0


def best_simple_path(int n, list us, list vs, list ws, int source, int target, long long floor):
    cdef Csr g
    cdef Search s
    cdef int i
    _build(&g, n, us, vs, ws)
    s.g = &g
    s.target = target
    s.floor = floor
    s.best = -1
    s.best_depth = 0
    s.path = <int *> malloc((n + 1) * sizeof(int))
    s.best_path = <int *> malloc((n + 1) * sizeof(int))
    s.on_path = <char *> malloc(n * sizeof(char))
    try:
        for i in range(n):
            s.on_path[i] = 0
        s.on_path[source] = 1
        s.path[0] = source
        s.depth = 1
        _visit(&s, source, 0)
        if s.best < 0:
            return -1, []
        return s.best, [s.best_path[i] for i in range(s.best_depth)]
    finally:
        free(s.path)
        free(s.best_path)
        free(s.on_path)
        _release(&g)
