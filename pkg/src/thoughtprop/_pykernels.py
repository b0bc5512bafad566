"""Pure-Python graph kernels.

Reference implementation of the compiled ``_ckernels`` module; both expose the
same functions with identical results, including tie-breaking. Graphs are
passed as parallel edge lists ``us``, ``vs``, ``ws`` over nodes ``0..n-1``.
"""

import heapq


def _adjacency(n, us, vs, ws):
    adj = [[] for _ in range(n)]
    for u, v, w in zip(us, vs, ws):
        adj[u].append((v, w))
        adj[v].append((u, w))
    for row in adj:
        row.sort()
    return adj


def dijkstra(n, us, vs, ws, source):
    """Single-source distances and predecessors; ``-1`` marks unreachable / none.

    The predecessor of ``v`` is the smallest-index neighbour ``u`` with
    ``dist[u] + w(u, v) == dist[v]``.
    """
    adj = _adjacency(n, us, vs, ws)
    dist = [-1] * n
    done = [False] * n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = d + w
            if dist[v] < 0 or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    pred = [-1] * n
    for v in range(n):
        if v == source or dist[v] < 0:
            continue
        for u, w in adj[v]:
            if dist[u] >= 0 and dist[u] + w == dist[v]:
                pred[v] = u
                break
    return dist, pred


def best_simple_path(n, us, vs, ws, source, target, floor):
    """Cheapest simple ``source -> target`` path whose length exceeds ``floor``.

    Returns ``(length, path)`` or ``(-1, [])``. Among equal lengths the path
    met first in ascending-neighbour depth-first order wins.
    """
    adj = _adjacency(n, us, vs, ws)
    best = [-1, []]
    on_path = [False] * n
    path = [source]
    on_path[source] = True

    def visit(u, length):
        if best[0] >= 0 and length >= best[0]:
            return
        if u == target:
            if length > floor:
                best[0] = length
                best[1] = list(path)
            return
        for v, w in adj[u]:
            if on_path[v]:
                continue
            on_path[v] = True
            path.append(v)
            visit(v, length + w)
            path.pop()
            on_path[v] = False

    visit(source, 0)
    return best[0], best[1]
