"""Worst-case performance of response processes.

Pipeline: :func:`check_response` -> :func:`reduce_rts` -> :func:`find_catastrophic`
-> :func:`asymptotic_performance` and :func:`response_performance`.
:func:`oracle_rp` recomputes response performance by brute force over the
composition with a user, independently of the reduced graph.
"""
from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .graphs import (
    INF,
    bfs_path,
    floyd_warshall,
    fw_path,
    karp_min_mean_cycle,
    tarjan_scc,
    zero_one_dijkstra,
)
from .semantics import Rts, build_rts, compose_parallel
from .syntax import ALL_BUT_OMEGA, IN, OMEGA, OUT, TAU, ProgramEnv

REPORT_SCHEMA_VERSION = 1


class Edge(NamedTuple):
    """One witness step: ``kind`` is ``"act"`` (label = action) or ``"time"`` (label = sorted U)."""

    src: int
    kind: str
    label: object
    dst: int

    def to_json(self):
        label = list(self.label) if self.kind == "time" else self.label
        return {"from": self.src, "kind": self.kind, "label": label, "to": self.dst}

    def __str__(self):
        if self.kind == "time":
            return "1" if not self.label else "{" + ",".join(self.label) + "}"
        return self.label


class PerformanceError(Exception):
    pass


class NotAResponseProcess(PerformanceError):
    def __init__(self, path):
        self.path = path
        super().__init__("out without a preceding in along: " + " ".join(map(str, path)))


class NoCycle(PerformanceError):
    pass


class ZeroThroughputCycle(PerformanceError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__("reachable cycle with full time steps and no in actions: "
                         + " ".join(map(str, cycle)))


class PreconditionViolated(PerformanceError):
    pass


def _time_edge(rts, s):
    u, d = rts.time[s]
    return Edge(s, "time", tuple(sorted(u)), d)


def replay(rts: Rts, edges) -> dict:
    """Check every edge exists in ``rts`` and the edges chain; return statistics."""
    acts = set(rts.actions)
    prev = None
    stats = {"in": 0, "out": 0, "time": 0, "full": 0, "tau": 0}
    for e in edges:
        if prev is not None and e.src != prev:
            raise AssertionError(f"broken chain at {e}")
        if e.kind == "time":
            if e.src not in rts.time:
                raise AssertionError(f"missing time edge {e}")
            u, d = rts.time[e.src]
            if d != e.dst or tuple(sorted(u)) != tuple(e.label):
                raise AssertionError(f"mismatched time edge {e}")
            stats["time"] += 1
            stats["full"] += not u
        else:
            if (e.src, e.label, e.dst) not in acts:
                raise AssertionError(f"missing action edge {e}")
            if e.label in (IN, OUT, TAU):
                stats[e.label] += 1
        prev = e.dst
    return stats


# --------------------------------------------------------------------------
# response check and reduction


def check_response(rts: Rts) -> None:
    """Raise :class:`NotAResponseProcess` if some path has more outs than ins.

    Label-correcting shortest paths with weight +1 for ``in``, -1 for ``out``;
    the first distance below zero yields the witness.
    """
    n = rts.num_nodes
    succ = [[] for _ in range(n)]
    for s, a, d in rts.actions:
        succ[s].append((d, 1 if a == IN else -1 if a == OUT else 0, Edge(s, "act", a, d)))
    for s in rts.time:
        e = _time_edge(rts, s)
        succ[s].append((e.dst, 0, e))
    dist = [None] * n
    parent = [None] * n
    dist[rts.root] = 0
    queue = deque([rts.root])
    queued = [False] * n
    queued[rts.root] = True
    while queue:
        v = queue.popleft()
        queued[v] = False
        for w, c, e in succ[v]:
            nd = dist[v] + c
            if dist[w] is None or nd < dist[w]:
                dist[w] = nd
                parent[w] = e
                if nd < 0:
                    raise NotAResponseProcess(_response_witness(rts, succ, parent, w))
                if not queued[w]:
                    queued[w] = True
                    queue.append(w)


def _response_witness(rts, succ, parent, w):
    path, seen, v = [], set(), w
    while not (v == rts.root and path):
        if v in seen:
            break
        seen.add(v)
        e = parent[v]
        if e is None:
            path.reverse()
            return _cut_at_negative(path)
        path.append(e)
        v = e.src
    else:
        path.reverse()
        return _cut_at_negative(path)
    # the parent chain closed a loop: it is a negative cycle; reach it and unroll
    cycle = []
    u = v
    while True:
        e = parent[u]
        cycle.append(e)
        u = e.src
        if u == v:
            break
    cycle.reverse()
    pay = [[(d, e) for d, _, e in succ[x]] for x in range(rts.num_nodes)]
    _, prefix = bfs_path(pay, rts.root, {v})
    walk = list(prefix)
    for _ in range(rts.num_nodes + 2):
        walk.extend(cycle)
    return _cut_at_negative(walk)


def _cut_at_negative(path):
    bal = 0
    for i, e in enumerate(path):
        if e.kind == "act":
            bal += (e.label == IN) - (e.label == OUT)
        if bal < 0:
            return path[: i + 1]
    return path


def _balance_classes(rts: Rts):
    """Per node: (can have balance 0, can have balance >= 1); None if unbounded."""
    n = rts.num_nodes
    bound = n
    succ = rts.action_succ()
    seen = {(rts.root, 0)}
    stack = [(rts.root, 0)]
    while stack:
        v, b = stack.pop()
        nxt = [(w, b + (a == IN) - (a == OUT)) for a, w in succ[v]]
        if v in rts.time:
            nxt.append((rts.time[v][1], b))
        for w, c in nxt:
            if c < 0:
                continue
            if c > bound:
                return None
            if (w, c) not in seen:
                seen.add((w, c))
                stack.append((w, c))
    zero = [False] * n
    pos = [False] * n
    for v, b in seen:
        if b == 0:
            zero[v] = True
        else:
            pos[v] = True
    return zero, pos


def reduce_rts(rts: Rts, balance_aware: bool = True) -> Rts:
    """Remove time steps that can never be part of a full step with a user ``U_n``.

    A step is always removed when both ``in`` and ``out`` are forbidden. With
    ``balance_aware`` (default) a step forbidding only ``in`` additionally needs
    a pending request at its source (balance >= 1), and a step forbidding only
    ``out`` needs balance 0; this is skipped if the balance is unbounded.
    """
    classes = _balance_classes(rts) if balance_aware else None
    if balance_aware and classes is None:
        warnings.warn("in/out balance is unbounded; using the plain pruning rule")

    def keep_time(s, u, d):
        has_in, has_out = IN in u, OUT in u
        if has_in and has_out:
            return False
        if classes is not None:
            zero, pos = classes
            if has_in and not pos[s]:
                return False
            if has_out and not zero[s]:
                return False
        return True

    return rts.restricted(lambda s, a, d: True, keep_time, reduced=True)


# --------------------------------------------------------------------------
# catastrophic cycles


def _without_inout_succ(rts):
    succ = [[] for _ in range(rts.num_nodes)]
    for s, a, d in rts.actions:
        if a not in (IN, OUT):
            succ[s].append((d, Edge(s, "act", a, d)))
    for s in rts.time:
        e = _time_edge(rts, s)
        succ[s].append((e.dst, e))
    return succ


def find_catastrophic(rrts: Rts, method: str = "scc") -> Optional[list]:
    """A cycle with a time step and no ``in``/``out``, as an edge list, or None.

    ``method="scc"`` is linear (Tarjan on the graph without in/out edges);
    ``method="closure"`` uses a cubic transitive closure, for benchmarking.
    """
    succ = _without_inout_succ(rrts)
    n = rrts.num_nodes
    if method == "scc":
        _, comp = tarjan_scc(n, [[w for w, _ in row] for row in succ])
        closes = lambda s, d: comp[s] == comp[d]  # noqa: E731
    elif method == "closure":
        reach = np.zeros((n, n), dtype=bool)
        for s, row in enumerate(succ):
            for d, _ in row:
                reach[s, d] = True
        for k in range(n):
            reach |= reach[:, k, None] & reach[None, k, :]
        closes = lambda s, d: s == d or bool(reach[d, s])  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}")
    for s in sorted(rrts.time):
        e = _time_edge(rrts, s)
        if closes(s, e.dst):
            if e.dst == s:
                return [e]
            _, back = bfs_path(succ, e.dst, {s})
            return [e] + back
    return None


# --------------------------------------------------------------------------
# bad cycles


@dataclass
class Asymptotic:
    value: Fraction  # average performance: time steps per in
    throughput: Fraction
    cycle: list  # closed walk in G (edges of the reduced graph)
    g_nodes: int
    g_edges: int
    gprime_edges: int
    method: str


def full_step_graph(rrts: Rts) -> Rts:
    """G: the reduced graph without non-full time steps, restricted to reachable nodes."""
    return rrts.restricted(lambda s, a, d: True, lambda s, u, d: not u)


def _gprime_baseline(g: Rts):
    n = g.num_nodes
    edges = [(s, d, 1 if a == IN else 0) for s, a, d in g.actions]
    dist, nxt = floyd_warshall(n, edges)
    gp = {}
    for v in sorted(g.time):
        _, v2 = g.time[v]
        col = dist[:, v]
        for u in np.nonzero(col < INF)[0]:
            u = int(u)
            c = int(col[u])
            old = gp.get((u, v2))
            if old is None or (c, v) < old:
                gp[(u, v2)] = (c, v)

    def path(u, v):
        return fw_path(nxt, u, v)

    return gp, path


def _gprime_improved(g: Rts):
    n = g.num_nodes
    rev = [[] for _ in range(n)]
    for s, a, d in g.actions:
        rev[d].append((s, 1 if a == IN else 0))
    gp = {}
    parents = {}
    for v in sorted(g.time):
        _, v2 = g.time[v]
        dist, parent = zero_one_dijkstra(n, rev, v)
        parents[v] = parent
        for u in range(n):
            c = dist[u]
            if c is None:
                continue
            old = gp.get((u, v2))
            if old is None or (c, v) < old:
                gp[(u, v2)] = (c, v)

    def path(u, v):
        parent = parents[v]
        out = [u]
        while u != v:
            u = parent[u]
            out.append(u)
        return out

    return gp, path


def build_gprime(g: Rts, method: str = "improved"):
    """Edges ``(u, v') -> (cost, v)``: cheapest path u ~> v in G0 then time step v -> v'."""
    if method == "baseline":
        return _gprime_baseline(g)
    if method == "improved":
        return _gprime_improved(g)
    raise ValueError(f"unknown method {method!r}")


def _expand(g, node_path):
    """Turn a node path in G0 into edges, preferring non-in edges where several exist."""
    best = {}
    for s, a, d in g.actions:
        w = 1 if a == IN else 0
        key = (s, d)
        if key not in best or (w, a) < best[key]:
            best[key] = (w, a)
    return [Edge(x, "act", best[(x, y)][1], y) for x, y in zip(node_path, node_path[1:])]


def asymptotic_performance(rrts: Rts, method: str = "improved") -> Asymptotic:
    """Maximal average performance (time steps per ``in``) over reachable full-step cycles.

    Computed as the inverse of Karp's minimum mean throughput on G'.
    """
    g = full_step_graph(rrts)
    gp, path = build_gprime(g, method)
    n = g.num_nodes
    adj = [[] for _ in range(n)]
    for (u, v2) in gp:
        adj[u].append(v2)
    comps, comp_of = tarjan_scc(n, adj)
    best = None
    by_comp = {}
    for (u, v2), (c, _) in sorted(gp.items()):
        if comp_of[u] == comp_of[v2]:
            by_comp.setdefault(comp_of[u], []).append((u, v2, c))
    for ci, inner in sorted(by_comp.items()):
        nodes = comps[ci]
        res = karp_min_mean_cycle(nodes, inner)
        if res is None:
            continue
        mean, cyc = res
        cyc_edges = [inner[i] for i in cyc]
        key = (mean, len(cyc_edges), sorted(u for u, _, _ in cyc_edges))
        if best is None or key < best[0]:
            best = (key, mean, cyc_edges)
    if best is None:
        raise NoCycle("no reachable cycle with a full time step")
    _, mean, cyc_edges = best
    walk = []
    for u, v2, _ in cyc_edges:
        _, v = gp[(u, v2)]
        walk.extend(_expand(g, path(u, v)))
        walk.append(_time_edge(g, v))
    # translate G ids back to reduced-graph ids via labels
    idx = {lab: i for i, lab in enumerate(rrts.labels)}
    walk = [Edge(idx[g.labels[e.src]], e.kind, e.label, idx[g.labels[e.dst]]) for e in walk]
    if mean == 0:
        raise ZeroThroughputCycle(walk)
    return Asymptotic(
        value=1 / mean,
        throughput=mean,
        cycle=walk,
        g_nodes=g.num_nodes,
        g_edges=g.num_edges,
        gprime_edges=len(gp),
        method=method,
    )


# --------------------------------------------------------------------------
# response performance


@dataclass
class ResponsePerformance:
    n: int
    value: int
    path: list = field(default_factory=list)


def _longest_from_root(num, succ, root, is_bad_internal):
    """Longest path (weights 0/1) from ``root`` in a graph whose positive edges lie outside cycles.

    ``succ[v]`` yields ``(w, weight, payload)``. Returns ``(value, payload path)``.
    """
    comps, comp_of = tarjan_scc(num, [[w for w, _, _ in row] for row in succ])
    reach = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for w, _, _ in succ[v]:
            if w not in reach:
                reach.add(w)
                stack.append(w)
    for v in reach:
        for w, c, pay in succ[v]:
            if comp_of[v] == comp_of[w] and c > 0:
                raise is_bad_internal(pay)
    best = [0] * len(comps)
    exit_edge = [None] * len(comps)
    for ci, nodes in enumerate(comps):  # reverse topological order
        for v in nodes:
            for w, c, pay in succ[v]:
                cj = comp_of[w]
                if cj != ci:
                    val = c + best[cj]
                    if val > best[ci] or (exit_edge[ci] is None and val == best[ci] and val > 0):
                        best[ci] = val
                        exit_edge[ci] = (v, w, pay)
    path = []
    v = root
    while exit_edge[comp_of[v]] is not None and best[comp_of[v]] > 0:
        ci = comp_of[v]
        x, w, pay = exit_edge[ci]
        if x != v:
            inner = [[(y, p) for y, _, p in succ[u] if comp_of[y] == ci] for u in range(num)]
            _, pays = bfs_path(inner, v, {x})
            path.extend(pays)
        path.append(pay)
        v = w
    return best[comp_of[root]], path


def response_performance(rrts: Rts, n: int) -> ResponsePerformance:
    """Maximum number of time steps over n-critical paths of the reduced graph.

    Layers ``(node, ins, outs)``; time steps before the n-th ``in`` must be full,
    afterwards they must not forbid ``out``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    extra = rrts.visible_labels() - {IN, OUT}
    if extra:
        warnings.warn(f"visible actions besides in/out are blocked by the user: {sorted(extra)}")
    asucc = rrts.action_succ()
    index = {}
    states = []
    succ = []

    def sid(v, i, o):
        k = (v, i, o)
        j = index.get(k)
        if j is None:
            j = len(states)
            index[k] = j
            states.append(k)
            succ.append(None)
            queue.append(j)
        return j

    queue = deque()
    root = sid(rrts.root, 0, 0)
    while queue:
        j = queue.popleft()
        v, i, o = states[j]
        row = []
        for a, w in asucc[v]:
            if a == IN:
                if i < n:
                    row.append((sid(w, i + 1, o), 0, Edge(v, "act", a, w)))
            elif a == OUT:
                if o + 1 <= n - 1 and o + 1 <= i:
                    row.append((sid(w, i, o + 1), 0, Edge(v, "act", a, w)))
            elif a == TAU:
                row.append((sid(w, i, o), 0, Edge(v, "act", a, w)))
        if v in rrts.time:
            u, w = rrts.time[v]
            if (i < n and not u) or (i == n and OUT not in u):
                row.append((sid(w, i, o), 1, _time_edge(rrts, v)))
        succ[j] = row

    def bad(pay):
        return PreconditionViolated(f"cycle with a usable time step through {pay}")

    value, path = _longest_from_root(len(states), succ, root, bad)
    return ResponsePerformance(n, value, path)


def user_term(n: int):
    from .casestudy import gen_user

    return gen_user(n)


def oracle_rp(p, n: int, definitions=None, cap: Optional[int] = None):
    """Brute-force response performance: longest omega-free discrete trace of ``p || U_n``.

    Returns ``math.inf`` when the composition has an omega-free cycle with a full
    time step.
    """
    if isinstance(p, ProgramEnv):
        definitions = p.definitions
        p = p.main
    rp_ = build_rts(p, cap=cap, definitions=definitions)
    ru = build_rts(user_term(n), cap=cap)
    comp = compose_parallel(rp_, ru, ALL_BUT_OMEGA, cap=cap)
    return discrete_longest(comp)[0]


def discrete_longest(comp: Rts):
    """Longest omega-free path (counting full time steps) from the root; inf on a positive cycle."""
    succ = [[] for _ in range(comp.num_nodes)]
    for s, a, d in comp.actions:
        if a != OMEGA:
            succ[s].append((d, 0, Edge(s, "act", a, d)))
    for s, (u, d) in comp.time.items():
        if not u:
            succ[s].append((d, 1, Edge(s, "time", (), d)))

    class _Inf(Exception):
        pass

    try:
        return _longest_from_root(comp.num_nodes, succ, comp.root, lambda pay: _Inf())
    except _Inf:
        return math.inf, []


# --------------------------------------------------------------------------
# report


@dataclass
class PerfReport:
    nodes: int
    edges: int
    reduced_nodes: int
    reduced_edges: int
    catastrophic: Optional[list] = None
    asymptotic: Optional[Asymptotic] = None
    asymptotic_error: Optional[str] = None
    rp: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        a = self.asymptotic
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "rts": {"nodes": self.nodes, "edges": self.edges},
            "rrts": {"nodes": self.reduced_nodes, "edges": self.reduced_edges},
            "catastrophic": None if self.catastrophic is None
            else {"cycle": [e.to_json() for e in self.catastrophic]},
            "asymptotic": None if a is None else {
                "value": str(a.value),
                "throughput": str(a.throughput),
                "method": a.method,
                "bad_cycle": [e.to_json() for e in a.cycle],
                "G": {"nodes": a.g_nodes, "edges": a.g_edges},
                "G_prime": {"nodes": a.g_nodes, "edges": a.gprime_edges},
            },
            "asymptotic_error": self.asymptotic_error,
            "rp": {str(k): {"value": r.value, "witness": [e.to_json() for e in r.path]}
                   for k, r in sorted(self.rp.items())},
            "warnings": list(self.warnings),
        }

    def to_text(self) -> str:
        lines = [
            f"RTS:  {self.nodes} nodes, {self.edges} edges",
            f"RRTS: {self.reduced_nodes} nodes, {self.reduced_edges} edges",
        ]
        if self.catastrophic is not None:
            lines.append("catastrophic cycle: " + " ".join(map(str, self.catastrophic)))
            lines.append(f"  through nodes {[e.src for e in self.catastrophic]}")
            return "\n".join(lines) + "\n"
        lines.append("catastrophic cycle: none")
        if self.asymptotic is not None:
            a = self.asymptotic
            lines.append(f"asymptotic performance: {a.value} (throughput {a.throughput}, {a.method})")
            lines.append("  bad cycle: " + " ".join(map(str, a.cycle)))
        elif self.asymptotic_error:
            lines.append(f"asymptotic performance: undefined ({self.asymptotic_error})")
        for k, r in sorted(self.rp.items()):
            lines.append(f"rp({k}) = {r.value}    witness: " + " ".join(map(str, r.path)))
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


def analyze(rts: Rts, rp_range=(), method: str = "improved") -> PerfReport:
    """Full pipeline on a built RTS. ``method="both"`` cross-checks the two G' constructions."""
    check_response(rts)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rrts = reduce_rts(rts)
        report = PerfReport(rts.num_nodes, rts.num_edges, rrts.num_nodes, rrts.num_edges)
        report.catastrophic = find_catastrophic(rrts)
        if report.catastrophic is None:
            try:
                if method == "both":
                    a1 = asymptotic_performance(rrts, "baseline")
                    a2 = asymptotic_performance(rrts, "improved")
                    if a1.value != a2.value:
                        raise AssertionError(f"methods disagree: {a1.value} vs {a2.value}")
                    report.asymptotic = a2
                else:
                    report.asymptotic = asymptotic_performance(rrts, method)
            except (NoCycle, ZeroThroughputCycle) as exc:
                report.asymptotic_error = str(exc)
            for k in rp_range:
                report.rp[k] = response_performance(rrts, k)
    report.warnings = sorted({str(w.message) for w in caught})
    return report
