"""Graph algorithms on dense integer node ids.

Adjacency is ``succ[v] -> iterable of w`` (or ``(w, weight)`` pairs where noted).
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction

import numpy as np

INF = np.iinfo(np.int64).max // 4


def tarjan_scc(n, succ):
    """Strongly connected components, iteratively, in reverse topological order.

    ``succ[v]`` yields successor ids. Returns ``(components, comp_of)``.
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp_of = [-1] * n
    stack, comps = [], []
    counter = 0
    for start in range(n):
        if index[start] != -1:
            continue
        work = [(start, iter(succ[start]))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack[start] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_of[w] = len(comps)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps, comp_of


def bfs_path(succ, src, targets, allowed=None):
    """Shortest (edge count) path ``src -> any target`` as a node list, or None.

    ``succ[v]`` yields ``(w, payload)``; ``allowed`` optionally filters nodes.
    Returns ``(nodes, payloads)``.
    """
    targets = set(targets)
    parent = {src: None}
    q = deque([src])
    while q:
        v = q.popleft()
        if v in targets and (v != src or src in targets):
            nodes, pays = [v], []
            while parent[v] is not None:
                v, pay = parent[v]
                nodes.append(v)
                pays.append(pay)
            return nodes[::-1], pays[::-1]
        for w, pay in succ[v]:
            if w not in parent and (allowed is None or w in allowed):
                parent[w] = (v, pay)
                q.append(w)
    return None


def floyd_warshall(n, edges):
    """All-pairs shortest distances and successor matrix for ``(u, v, w)`` edges.

    ``dist[u, v]`` is ``INF`` when ``v`` is unreachable; ``nxt[u, v]`` is the
    node following ``u`` on a shortest path. Theta(n^3).
    """
    dist = np.full((n, n), INF, dtype=np.int64)
    nxt = np.full((n, n), -1, dtype=np.int64)
    idx = np.arange(n)
    dist[idx, idx] = 0
    nxt[idx, idx] = idx
    for u, v, w in edges:
        if w < dist[u, v]:
            dist[u, v] = w
            nxt[u, v] = v
    for k in range(n):
        through = dist[:, k, None] + dist[None, k, :]
        better = through < dist
        if better.any():
            dist = np.where(better, through, dist)
            nxt = np.where(better, nxt[:, k, None], nxt)
    dist[dist >= INF] = INF
    return dist, nxt


def fw_path(nxt, u, v):
    if nxt[u, v] < 0:
        return None
    path = [u]
    while u != v:
        u = int(nxt[u, v])
        path.append(u)
    return path


def zero_one_dijkstra(n, succ, src):
    """Single-source shortest paths for weights in {0, 1} with a two-level deque.

    ``succ[v]`` yields ``(w, weight)``. Returns ``(dist, parent)``; ``dist`` uses
    ``None`` for unreachable nodes.
    """
    dist = [None] * n
    parent = [-1] * n
    dist[src] = 0
    dq = deque([src])
    done = [False] * n
    while dq:
        v = dq.popleft()
        if done[v]:
            continue
        done[v] = True
        dv = dist[v]
        for w, c in succ[v]:
            nd = dv + c
            if dist[w] is None or nd < dist[w]:
                dist[w] = nd
                parent[w] = v
                if c == 0:
                    dq.appendleft(w)
                else:
                    dq.append(w)
    return dist, parent


def karp_min_mean_cycle(nodes, edges):
    """Minimum mean cycle of one strongly connected component (Karp, 1978).

    ``nodes`` is a list of node ids; ``edges`` a list of ``(u, v, w)`` with
    integer weights, all inside the component. Returns ``(mean, cycle)`` with
    ``mean`` a Fraction and ``cycle`` a list of edge indices into ``edges``,
    or ``None`` if there is no cycle.
    """
    if not edges:
        return None
    k = len(nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    src = np.array([pos[u] for u, _, _ in edges], dtype=np.int64)
    dst = np.array([pos[v] for _, v, _ in edges], dtype=np.int64)
    wt = np.array([w for _, _, w in edges], dtype=np.int64)
    D = np.full((k + 1, k), INF, dtype=np.int64)
    P = np.full((k + 1, k), -1, dtype=np.int64)
    D[0, 0] = 0
    for j in range(1, k + 1):
        prev = D[j - 1, src]
        ok = prev < INF
        cand = np.where(ok, prev + wt, INF)
        row = np.full(k, INF, dtype=np.int64)
        np.minimum.at(row, dst, cand)
        D[j] = row
        hit = np.nonzero((cand == row[dst]) & ok)[0][::-1]
        # reversed assignment: the lowest edge index achieving the min wins
        best = np.full(k, -1, dtype=np.int64)
        best[dst[hit]] = hit
        P[j] = best
    best_mean = None
    best_v = None
    for v in range(k):
        if D[k, v] >= INF:
            continue
        worst = None
        for j in range(k):
            if D[j, v] >= INF:
                continue
            m = Fraction(int(D[k, v] - D[j, v]), k - j)
            if worst is None or m > worst:
                worst = m
        if worst is not None and (best_mean is None or worst < best_mean):
            best_mean, best_v = worst, v
    if best_mean is None:
        return None
    # walk back the k-edge walk ending at best_v; some cycle on it has the min mean
    walk = []
    v = best_v
    for j in range(k, 0, -1):
        e = int(P[j, v])
        walk.append(e)
        v = int(src[e])
    walk.reverse()
    cycle = _best_cycle_on_walk(walk, src, dst, wt, best_mean)
    return best_mean, cycle


def _best_cycle_on_walk(walk, src, dst, wt, target):
    """Split a walk (edge indices) into simple cycles and return one of mean ``target``."""
    found = []
    seen = {}
    stack = []
    for e in walk:
        u = int(src[e])
        if u in seen:
            start = seen[u]
            cyc = stack[start:]
            found.append(cyc)
            for f in cyc:
                seen.pop(int(src[f]), None)
            del stack[start:]
        seen[u] = len(stack)
        stack.append(e)
    last = int(dst[walk[-1]])
    if last in seen:
        found.append(stack[seen[last]:])
    candidates = []
    for cyc in found:
        m = Fraction(int(sum(int(wt[e]) for e in cyc)), len(cyc))
        if m == target:
            candidates.append(cyc)
    if not candidates:
        raise AssertionError("Karp walk contains no minimum-mean cycle")
    candidates.sort(key=lambda c: (len(c), sorted(int(src[e]) for e in c)))
    return _rotate(candidates[0], src)


def _rotate(cyc, src):
    i = min(range(len(cyc)), key=lambda j: int(src[cyc[j]]))
    return cyc[i:] + cyc[:i]
