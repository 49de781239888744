from pathlib import Path

import hypothesis.strategies as st
import pytest
from hypothesis import settings

from pafas.syntax import (
    ALL_BUT_OMEGA,
    NIL,
    TAU,
    Choice,
    Parallel,
    Prefix,
    Rec,
    Relabel,
    RelabelFn,
    Var,
)

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"

ACTIONS = ["a", "b", "c", TAU]
VISIBLE = ["a", "b", "c"]

relabel_fns = st.dictionaries(
    st.sampled_from(VISIBLE), st.sampled_from(VISIBLE + [TAU]), max_size=2
).map(RelabelFn.from_mapping)

sync_sets = st.one_of(
    st.frozensets(st.sampled_from(VISIBLE), max_size=2),
    st.just(ALL_BUT_OMEGA),
)


@st.composite
def sequential(draw, depth=3, bound=(), guarded=True):
    """Parallel-free terms; recursion variables only appear under a prefix."""
    options = ["nil", "prefix"]
    if depth > 0:
        options += ["prefix", "choice", "rec"]
        if not bound:  # recursion through relabelling is infinite-state
            options.append("relabel")
    if bound and guarded:
        options += ["var", "var"]
    kind = draw(st.sampled_from(options))
    if kind == "nil":
        return NIL
    if kind == "var":
        return Var(draw(st.sampled_from(bound)))
    if kind == "prefix":
        a = draw(st.sampled_from(ACTIONS))
        body = draw(sequential(max(depth - 1, 0), bound, True))
        return Prefix(a, body, draw(st.booleans()))
    if kind == "choice":
        return Choice(draw(sequential(depth - 1, bound, guarded)), draw(sequential(depth - 1, bound, guarded)))
    if kind == "relabel":
        return Relabel(draw(sequential(depth - 1, bound, guarded)), draw(relabel_fns))
    name = draw(st.sampled_from(["x", "y"]))
    return Rec(name, draw(sequential(depth - 1, bound + (name,), False)))


@st.composite
def terms(draw, depth=2):
    """Closed guarded terms; parallel only outside recursion, so state spaces stay finite."""
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        return draw(sequential())
    kind = draw(st.sampled_from(["par", "par", "choice", "relabel"]))
    left, right = draw(terms(depth - 1)), draw(terms(depth - 1))
    if kind == "par":
        return Parallel(left, right, draw(sync_sets))
    if kind == "choice":
        return Choice(left, right)
    return Relabel(left, draw(relabel_fns))


@pytest.fixture
def corpus():
    return CORPUS


def random_response_rts(rng, levels=3, width=3, layered=False):
    """Random RTS over in/out/tau that is a response process by construction.

    Node ``(b, k)`` has in/out balance ``b``; ``in`` raises it, ``out`` lowers it
    and tau or time steps keep it, so no path shows more outs than ins. With
    ``layered`` tau and time steps only move to a higher ``k``, so every cycle
    needs in/out and the result is free of catastrophic cycles.
    """
    from pafas.semantics import Rts

    nodes = [(b, k) for b in range(levels) for k in range(width)]
    idx = {v: i for i, v in enumerate(nodes)}
    actions, time = set(), {}
    forbidden = [frozenset(), frozenset(), frozenset({"in"}), frozenset({"out"}), frozenset({"in", "out"})]
    for (b, k), i in idx.items():
        if b + 1 < levels:
            actions.add((i, "in", idx[(b + 1, rng.randrange(width))]))
        if b > 0 and rng.random() < 0.8:
            actions.add((i, "out", idx[(b - 1, rng.randrange(width))]))
        lo = k + 1 if layered else 0
        if lo < width and rng.random() < 0.3:
            actions.add((i, "tau", idx[(b, rng.randrange(lo, width))]))
        if lo < width and rng.random() < 0.8:
            time[i] = (rng.choice(forbidden), idx[(b, rng.randrange(lo, width))])
    labels = [f"s{b}_{k}" for b, k in nodes]
    rts = Rts(0, labels, sorted(actions), time)
    return rts.restricted(lambda s, a, d: True, lambda s, u, d: True)


ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str):
    """Store a pass/fail line for the acceptance summary and echo it."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
