from itertools import chain, combinations

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from pafas.casestudy import gen_fifo
from pafas.parser import parse, parse_term
from pafas.semantics import (
    FULL,
    StateCapExceeded,
    action_successors,
    build_rts,
    compose_parallel,
    has_refusal_trace,
    is_isomorphic,
    time_step,
)
from pafas.syntax import (
    NIL,
    TAU,
    Choice,
    Nil,
    Parallel,
    Prefix,
    Rec,
    Relabel,
    Var,
    canonical_key,
    subterms,
    unfold,
)

from conftest import sync_sets, terms

# --------------------------------------------------------------------------
# independent refusal oracle: applies each rule directly, enumerating refusal
# sets over a finite alphabet instead of using the forbidden-set shortcut


def alphabet(t):
    sigma = {"zz"}  # stands for every action the term never mentions
    for s in subterms(t):
        if isinstance(s, Prefix):
            sigma.add(s.action)
        elif isinstance(s, Relabel):
            for a, b in s.fn.pairs:
                sigma.update((a, b))
        elif isinstance(s, Parallel) and isinstance(s.sync, frozenset):
            sigma.update(s.sync)
    sigma.discard(TAU)
    return frozenset(sigma)


def powerset(s):
    s = sorted(s)
    return [frozenset(c) for c in chain.from_iterable(combinations(s, k) for k in range(len(s) + 1))]


def refuse(t, X, sigma, memo):
    """Target of the time step of ``t`` refusing ``X``, or None."""
    key = (t, X)
    if key in memo:
        return memo[key]
    memo[key] = None  # guarded terms never re-enter before a prefix
    if isinstance(t, Nil):
        r = t
    elif isinstance(t, Prefix):
        if not t.urgent:
            r = Prefix(t.action, t.body, True)
        else:
            r = t if t.action != TAU and t.action not in X else None
    elif isinstance(t, Choice):
        l, rr = refuse(t.left, X, sigma, memo), refuse(t.right, X, sigma, memo)
        r = Choice(l, rr) if l is not None and rr is not None else None
    elif isinstance(t, Parallel):
        r = None
        subsets = powerset(sigma)
        for X1 in subsets:
            p1 = refuse(t.left, X1, sigma, memo)
            if p1 is None:
                continue
            for X2 in subsets:
                p2 = refuse(t.right, X2, sigma, memo)
                if p2 is None:
                    continue
                allowed = {a for a in X1 | X2 if a in t.sync} | {a for a in X1 & X2 if a not in t.sync}
                if X <= allowed:
                    r = Parallel(p1, p2, t.sync)
                    break
            if r is not None:
                break
    elif isinstance(t, Relabel):
        pre = frozenset(a for a in sigma if t.fn(a) in X or t.fn(a) == TAU)
        p = refuse(t.body, pre, sigma, memo)
        r = Relabel(p, t.fn) if p is not None else None
    elif isinstance(t, Rec):
        r = refuse(unfold(t), X, sigma, memo)
    else:
        raise TypeError(t)
    memo[key] = r
    return r


@given(terms())
def test_forbidden_set_matches_rule_oracle(t):
    sigma = alphabet(t)
    ts = time_step(t)
    memo = {}
    for X in powerset(sigma):
        expected = refuse(t, X, sigma, memo)
        if ts is None or X & ts.forbidden:
            assert expected is None, (X, ts)
        else:
            assert expected is not None, X
            assert canonical_key(expected) == canonical_key(ts.target)


# --------------------------------------------------------------------------
# hand-checked examples


def test_choice_actions():
    t = parse_term("a.0 + _b.0")
    assert action_successors(t) == {("a", NIL), ("b", NIL)}


def test_nil_has_no_actions():
    assert action_successors(NIL) == frozenset()


def test_urgent_syncs_with_lazy():
    t = parse_term("_a.b.0 |[a]| a.c.0")
    assert action_successors(t) == {("a", parse_term("b.0 |[a]| c.0"))}


def test_choice_time_step():
    ts = time_step(parse_term("a.0 + _b.0"))
    assert ts.forbidden == {"b"}
    assert ts.target == parse_term("_a.0 + _b.0")


def test_urgent_tau_blocks_time():
    assert time_step(parse_term("_tau.a.0")) is None


def test_hidden_loop_steps():
    t = parse_term("(rec x. a.x) / {a}")
    ts = time_step(t)
    assert ts.full
    assert canonical_key(ts.target) == canonical_key(parse_term("(_a.(rec x. a.x)) / {a}"))
    assert time_step(ts.target) is None


def test_parallel_forbidden_sets():
    # a synchronised action is forbidden only if both sides forbid it
    ts = time_step(parse_term("_a.0 |[a]| a.0"))
    assert ts.forbidden == frozenset()
    ts = time_step(parse_term("_a.0 |[a]| _a.0"))
    assert ts.forbidden == {"a"}
    ts = time_step(parse_term("_a.0 |[b]| b.0"))
    assert ts.forbidden == {"a"}


def test_named_definitions_resolve():
    env = parse("A = a.B; B = _b.A; main A")
    assert action_successors(env.main, env.definitions) == {("a", Var("B"))}
    assert time_step(Var("B"), env.definitions).forbidden == {"b"}


# --------------------------------------------------------------------------
# properties


@given(terms())
def test_time_step_idempotent(t):
    ts = time_step(t)
    if ts is not None:
        again = time_step(ts.target)
        assert again is None or canonical_key(again.target) == canonical_key(ts.target)


@given(terms())
def test_rts_time_determinism(t):
    r = build_rts(t)
    assert all(isinstance(s, int) for s in r.time)  # one entry per node by construction
    for v, term in enumerate(r.terms):
        ts = time_step(term)
        assert (ts is None) == (v not in r.time)
        if ts is not None:
            assert r.time[v][0] == ts.forbidden


def lazify(t):
    if isinstance(t, Prefix):
        return Prefix(t.action, lazify(t.body), False)
    if isinstance(t, Choice):
        return Choice(lazify(t.left), lazify(t.right))
    if isinstance(t, Parallel):
        return Parallel(lazify(t.left), lazify(t.right), t.sync)
    if isinstance(t, Relabel):
        return Relabel(lazify(t.body), t.fn)
    if isinstance(t, Rec):
        return Rec(t.name, lazify(t.body))
    return t


@given(terms())
def test_patience(t):
    ts = time_step(lazify(t))
    assert ts is not None and ts.full


@given(st.sampled_from(["a", "b", TAU]))
def test_lazy_prefix_alone_is_patient(a):
    assert time_step(Prefix(a, NIL)).full


@settings(max_examples=50)
@given(terms(), terms(), sync_sets)
def test_compose_matches_direct_build(p, q, sync):
    direct = build_rts(Parallel(p, q, sync))
    composed = compose_parallel(build_rts(p), build_rts(q), sync)
    assert composed.edge_set_by_label() == direct.edge_set_by_label()
    assert is_isomorphic(composed, direct)


@given(terms())
def test_nil_is_interleaving_unit(t):
    r = build_rts(t)
    assert is_isomorphic(compose_parallel(r, build_rts(NIL), frozenset()), r)


def discrete_traces(r, depth):
    """Visible discrete traces (actions and FULL) up to ``depth`` steps."""
    out = set()
    frontier = {(r.root, ())}
    succ = r.action_succ()
    for _ in range(depth):
        nxt = set()
        for v, tr in frontier:
            for a, w in succ[v]:
                nxt.add((w, tr if a == TAU else tr + (a,)))
            if v in r.time and not r.time[v][0]:
                nxt.add((r.time[v][1], tr + (FULL,)))
        out.update(tr for _, tr in nxt)
        frontier = nxt
    return out


@given(terms())
def test_discrete_traces_are_refusal_traces(t):
    r = build_rts(t)
    sigma = alphabet(t)
    for v, (u, _) in r.time.items():
        if not u:
            assert refuse(r.terms[v], sigma, sigma, {}) is not None
    for tr in discrete_traces(r, 4):
        assert has_refusal_trace(r, tr)


# --------------------------------------------------------------------------
# RTS construction


def test_nil_rts():
    r = build_rts(NIL)
    assert (r.num_nodes, len(r.actions)) == (1, 0)
    assert r.time == {0: (frozenset(), 0)}


def test_fifo_golden_counts():
    r = build_rts(gen_fifo(1))
    assert (r.num_nodes, len(r.actions), len(r.time)) == (8, 12, 8)
    assert r.num_edges == 20


def test_node_cap():
    with pytest.raises(StateCapExceeded):
        build_rts(gen_fifo(4), cap=5)


def test_infinite_state_hits_cap():
    env = parse("P = a.(P |[]| P); main P")
    with pytest.raises(StateCapExceeded):
        build_rts(env, cap=200)


def test_refusal_trace_replay():
    r = build_rts(gen_fifo(1))
    assert has_refusal_trace(r, ["in", FULL, frozenset(), "out", {"in"}])
    assert not has_refusal_trace(r, ["out"])
