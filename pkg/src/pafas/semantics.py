"""Refusal operational semantics and refusal transition systems.

A conditional time step is stored only through its *forbidden set* ``U``: the
finite set of actions the process cannot refuse. The process can let one unit
of time pass while refusing ``X`` exactly when ``X`` and ``U`` are disjoint;
``U`` empty is a full time step. A missing time step means time is stopped
(an urgent ``tau`` is pending somewhere).
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional

from .syntax import (
    ALL_BUT_OMEGA,
    TAU,
    Choice,
    Nil,
    Parallel,
    Prefix,
    ProgramEnv,
    Rec,
    Relabel,
    Term,
    Var,
    canonical_key,
    unfold,
)

DEFAULT_NODE_CAP = 1_000_000


class StateCapExceeded(Exception):
    def __init__(self, cap):
        self.cap = cap
        super().__init__(f"state space exceeds the node cap of {cap}")


class TermTooDeep(StateCapExceeded):
    """States nest without bound, e.g. recursion through a relabelling."""

    def __init__(self, cap):
        Exception.__init__(self, "state terms nest without bound (recursion through relabelling?)")
        self.cap = cap


class TimeStep(NamedTuple):
    forbidden: frozenset
    target: Term

    @property
    def full(self) -> bool:
        return not self.forbidden


def default_cap() -> int:
    env = os.environ.get("PAFAS_NODE_CAP")
    return int(env) if env else DEFAULT_NODE_CAP


def _synchronises(sync, action) -> bool:
    if action == TAU:
        return False
    return action in sync


class Semantics:
    """SOS rules over terms, with named definitions acting as recursion binders.

    Results are memoised per term; a definition reference behaves like the
    unfolding of its defining equation.
    """

    def __init__(self, definitions: Optional[Mapping[str, Term]] = None):
        self.definitions = dict(definitions or {})
        self._act: dict = {}
        self._time: dict = {}

    def _resolve(self, t: Var) -> Term:
        try:
            return self.definitions[t.name]
        except KeyError:
            raise ValueError(f"free variable {t.name!r} reached during execution") from None

    # -- action transitions

    def action_successors(self, t: Term) -> frozenset:
        r = self._act.get(t)
        if r is None:
            r = frozenset(self._actions(t))
            self._act[t] = r
        return r

    def _actions(self, t):
        if isinstance(t, Nil):
            return ()
        if isinstance(t, Prefix):
            return ((t.action, t.body),)
        if isinstance(t, Choice):
            return self.action_successors(t.left) | self.action_successors(t.right)
        if isinstance(t, Parallel):
            out = set()
            left = self.action_successors(t.left)
            right = self.action_successors(t.right)
            for a, l2 in left:
                if not _synchronises(t.sync, a):
                    out.add((a, Parallel(l2, t.right, t.sync)))
            for a, r2 in right:
                if not _synchronises(t.sync, a):
                    out.add((a, Parallel(t.left, r2, t.sync)))
            by_action = {}
            for a, r2 in right:
                if _synchronises(t.sync, a):
                    by_action.setdefault(a, []).append(r2)
            for a, l2 in left:
                for r2 in by_action.get(a, ()):
                    out.add((a, Parallel(l2, r2, t.sync)))
            return out
        if isinstance(t, Relabel):
            return {(t.fn(a), Relabel(b, t.fn)) for a, b in self.action_successors(t.body)}
        if isinstance(t, Rec):
            return self.action_successors(unfold(t))
        if isinstance(t, Var):
            return self.action_successors(self._resolve(t))
        raise TypeError(t)

    # -- time steps

    def time_step(self, t: Term) -> Optional[TimeStep]:
        if t in self._time:
            return self._time[t]
        r = self._time_step(t)
        self._time[t] = r
        return r

    def _time_step(self, t):
        if isinstance(t, Nil):
            return TimeStep(frozenset(), t)
        if isinstance(t, Prefix):
            if not t.urgent:
                return TimeStep(frozenset(), Prefix(t.action, t.body, True))
            if t.action == TAU:
                return None
            return TimeStep(frozenset({t.action}), t)
        if isinstance(t, Choice):
            l = self.time_step(t.left)
            if l is None:
                return None
            r = self.time_step(t.right)
            if r is None:
                return None
            return TimeStep(l.forbidden | r.forbidden, Choice(l.target, r.target))
        if isinstance(t, Parallel):
            l = self.time_step(t.left)
            if l is None:
                return None
            r = self.time_step(t.right)
            if r is None:
                return None
            u1, u2 = l.forbidden, r.forbidden
            forbidden = frozenset(
                a for a in u1 | u2
                if (a in u1 and a in u2) or not _synchronises(t.sync, a)
            )
            return TimeStep(forbidden, Parallel(l.target, r.target, t.sync))
        if isinstance(t, Relabel):
            b = self.time_step(t.body)
            if b is None:
                return None
            mapped = frozenset(t.fn(u) for u in b.forbidden)
            if TAU in mapped:
                return None
            return TimeStep(mapped, Relabel(b.target, t.fn))
        if isinstance(t, Rec):
            return self.time_step(unfold(t))
        if isinstance(t, Var):
            return self.time_step(self._resolve(t))
        raise TypeError(t)


def action_successors(t: Term, definitions=None) -> frozenset:
    return Semantics(definitions).action_successors(t)


def time_step(t: Term, definitions=None) -> Optional[TimeStep]:
    return Semantics(definitions).time_step(t)


# --------------------------------------------------------------------------
# refusal transition systems


@dataclass
class Rts:
    """Rooted refusal transition system.

    ``actions`` holds ``(src, label, dst)`` triples; ``time`` maps a node to its
    unique time edge ``(forbidden, dst)``. Node ids are dense integers.
    """

    root: int
    labels: list
    actions: list
    time: dict
    terms: Optional[list] = None
    reduced: bool = False
    _succ: Optional[list] = field(default=None, init=False, repr=False, compare=False)

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    @property
    def num_edges(self) -> int:
        return len(self.actions) + len(self.time)

    def action_succ(self) -> list:
        """Per-node list of ``(label, dst)``."""
        if self._succ is None:
            succ = [[] for _ in self.labels]
            for s, a, d in self.actions:
                succ[s].append((a, d))
            self._succ = succ
        return self._succ

    def visible_labels(self) -> set:
        return {a for _, a, _ in self.actions if a != TAU}

    def time_edges(self):
        for s in sorted(self.time):
            u, d = self.time[s]
            yield s, u, d

    def edge_set_by_label(self):
        """Node-id-free description used for equality up to renumbering."""
        L = self.labels
        acts = frozenset((L[s], a, L[d]) for s, a, d in self.actions)
        times = frozenset((L[s], u, L[d]) for s, (u, d) in self.time.items())
        return L[self.root], frozenset(L), acts, times

    def restricted(self, keep_action, keep_time, reduced=None) -> "Rts":
        """Subgraph with filtered edges, restricted to nodes reachable from the root."""
        succ = [[] for _ in self.labels]
        for s, a, d in self.actions:
            if keep_action(s, a, d):
                succ[s].append(d)
        time = {s: (u, d) for s, (u, d) in self.time.items() if keep_time(s, u, d)}
        for s, (u, d) in time.items():
            succ[s].append(d)
        seen = {self.root}
        order = [self.root]
        q = deque([self.root])
        while q:
            v = q.popleft()
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    q.append(w)
        order.sort()
        remap = {old: new for new, old in enumerate(order)}
        return Rts(
            root=remap[self.root],
            labels=[self.labels[v] for v in order],
            actions=[(remap[s], a, remap[d]) for s, a, d in self.actions
                     if s in remap and keep_action(s, a, d)],
            time={remap[s]: (u, remap[d]) for s, (u, d) in time.items() if s in remap},
            terms=[self.terms[v] for v in order] if self.terms is not None else None,
            reduced=self.reduced if reduced is None else reduced,
        )


def build_rts(t, cap: Optional[int] = None, definitions=None, semantics: Optional[Semantics] = None) -> Rts:
    """Breadth-first closure under action transitions and time steps.

    ``t`` may be a term or a :class:`ProgramEnv`. Nodes are merged by
    canonical key.
    """
    if isinstance(t, ProgramEnv):
        definitions = t.definitions
        t = t.main
    cap = default_cap() if cap is None else cap
    sem = semantics or Semantics(definitions)
    index = {}
    labels, terms = [], []
    actions, time = [], {}

    def node(term):
        k = canonical_key(term)
        i = index.get(k)
        if i is None:
            if len(labels) >= cap:
                raise StateCapExceeded(cap)
            i = len(labels)
            index[k] = i
            labels.append(k)
            terms.append(term)
            queue.append(i)
        return i

    queue = deque()
    try:
        root = node(t)
        while queue:
            i = queue.popleft()
            term = terms[i]
            edges = set()
            for a, succ in sem.action_successors(term):
                edges.add((a, node(succ)))
            for a, j in sorted(edges):
                actions.append((i, a, j))
            ts = sem.time_step(term)
            if ts is not None:
                time[i] = (ts.forbidden, node(ts.target))
    except RecursionError:
        raise TermTooDeep(cap) from None
    return Rts(root, labels, actions, time, terms)


def _parallel_forbidden(u1, u2, sync):
    return frozenset(a for a in u1 | u2 if (a in u1 and a in u2) or not _synchronises(sync, a))


def compose_parallel(r1: Rts, r2: Rts, sync=ALL_BUT_OMEGA, cap: Optional[int] = None) -> Rts:
    """Product of two RTSs under the parallel-composition rules.

    Node labels are the canonical keys of the corresponding parallel terms, so
    the result coincides with ``build_rts`` of the syntactic composition.
    """
    cap = default_cap() if cap is None else cap
    succ1, succ2 = r1.action_succ(), r2.action_succ()
    index = {}
    pairs, labels, terms = [], [], []
    actions, time = [], {}
    queue = deque()

    def node(p, q):
        i = index.get((p, q))
        if i is None:
            if len(pairs) >= cap:
                raise StateCapExceeded(cap)
            i = len(pairs)
            index[(p, q)] = i
            pairs.append((p, q))
            if r1.terms is not None and r2.terms is not None:
                term = Parallel(r1.terms[p], r2.terms[q], sync)
                terms.append(term)
                labels.append(canonical_key(term))
            else:
                labels.append("(" + r1.labels[p] + " " + _sync_label(sync) + " " + r2.labels[q] + ")")
            queue.append(i)
        return i

    root = node(r1.root, r2.root)
    while queue:
        i = queue.popleft()
        p, q = pairs[i]
        edges = set()
        for a, p2 in succ1[p]:
            if not _synchronises(sync, a):
                edges.add((a, node(p2, q)))
        for a, q2 in succ2[q]:
            if not _synchronises(sync, a):
                edges.add((a, node(p, q2)))
        for a, p2 in succ1[p]:
            if _synchronises(sync, a):
                for b, q2 in succ2[q]:
                    if a == b:
                        edges.add((a, node(p2, q2)))
        for a, j in sorted(edges):
            actions.append((i, a, j))
        if p in r1.time and q in r2.time:
            u1, p2 = r1.time[p]
            u2, q2 = r2.time[q]
            time[i] = (_parallel_forbidden(u1, u2, sync), node(p2, q2))
    return Rts(root, labels, actions, time, terms if len(terms) == len(labels) else None)


def _sync_label(sync):
    if sync is ALL_BUT_OMEGA:
        return "||"
    return "|[" + ",".join(sorted(sync)) + "]|"


def is_isomorphic(r1: Rts, r2: Rts) -> bool:
    """Rooted isomorphism respecting action labels and forbidden sets (ignores node labels)."""
    import networkx as nx
    from networkx.algorithms.isomorphism import DiGraphMatcher

    def as_graph(r):
        g = nx.DiGraph()
        for v in range(r.num_nodes):
            g.add_node(v, root=(v == r.root))
        for s, a, d in r.actions:
            g.add_edge(s, d)
            g.edges[s, d].setdefault("labels", set()).add(("act", a))
        for s, (u, d) in r.time.items():
            g.add_edge(s, d)
            g.edges[s, d].setdefault("labels", set()).add(("time", tuple(sorted(u))))
        return g

    if (r1.num_nodes, len(r1.actions), len(r1.time)) != (r2.num_nodes, len(r2.actions), len(r2.time)):
        return False
    g1, g2 = as_graph(r1), as_graph(r2)
    m = DiGraphMatcher(
        g1, g2,
        node_match=lambda x, y: x["root"] == y["root"],
        edge_match=lambda x, y: x["labels"] == y["labels"],
    )
    return m.is_isomorphic()


# --------------------------------------------------------------------------
# trace replay


def _tau_closure(rts: Rts, states):
    succ = rts.action_succ()
    seen = set(states)
    stack = list(states)
    while stack:
        v = stack.pop()
        for a, w in succ[v]:
            if a == TAU and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


FULL = "FULL"  # refusal item standing for the whole alphabet


def refusal_trace_states(rts: Rts, trace, start=None) -> set:
    """States reachable by the refusal trace ``trace`` (tau steps are silent).

    Items are visible action names, finite sets of refused actions, or
    :data:`FULL` for refusing everything.
    """
    succ = rts.action_succ()
    current = _tau_closure(rts, {rts.root} if start is None else set(start))
    for item in trace:
        nxt = set()
        for v in current:
            if isinstance(item, str) and item != FULL:
                nxt.update(w for a, w in succ[v] if a == item)
            elif v in rts.time:
                u, w = rts.time[v]
                if (item == FULL and not u) or (item != FULL and not (u & set(item))):
                    nxt.add(w)
        current = _tau_closure(rts, nxt)
        if not current:
            break
    return current


def has_refusal_trace(rts: Rts, trace) -> bool:
    return bool(refusal_trace_states(rts, trace))
