import pytest

from pafas.casestudy import (
    BufferSpec,
    bc_name,
    builtin,
    gen_buff,
    gen_fifo,
    gen_pipe,
    gen_source,
    gen_user,
)
from pafas.parser import parse, parse_term, render
from pafas.semantics import build_rts
from pafas.syntax import IN, OUT, Prefix, Var, canonical_key, check_well_formed, render_term


def test_fifo_states():
    env = gen_fifo(1)
    assert list(env.definitions) == ["FIFO0", "FIFO1", "FIFO2", "FIFO3"]
    assert env.definitions["FIFO0"] == Prefix(IN, Var("FIFO1"))
    assert env.definitions["FIFO3"] == Prefix(OUT, Var("FIFO2"))
    assert render_term(env.definitions["FIFO2"]) == "in.FIFO3 + out.FIFO1"


def test_pipe_shape():
    src = render(gen_pipe(1))
    assert "C[in->d0]" in src
    assert "C[in->d1,out->d0]" in src
    assert "C[out->d1]" in src
    assert src.rstrip().endswith("/ {d0,d1,d2}")


def test_buff_full_input_slot():
    env = gen_buff(2)
    assert env.definitions[bc_name(True, False, 0, 2)] == Prefix("r0", Var(bc_name(True, True, 1, 1)))
    assert env.definitions[bc_name(False, False, 0, 0)] == Prefix(IN, Var(bc_name(True, False, 0, 0)))


def test_buff_circular_write():
    # with one value stored from index 1, the next write goes to cell 0
    env = gen_buff(2)
    body = render_term(env.definitions[bc_name(True, False, 1, 1)])
    assert body.startswith("w0.")


def test_user_threads():
    assert canonical_key(gen_user(1)) == canonical_key(parse_term("_in._out._omega.0"))
    two = parse_term("_in._out._omega.0 |[omega]| _in._out._omega.0")
    assert canonical_key(gen_user(2)) == canonical_key(two)


@pytest.mark.parametrize("kind", ["fifo", "pipe", "buff"])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_generated_source_roundtrips(kind, N):
    env = check_well_formed(parse(gen_source(kind, N)))
    assert canonical_key(env.main) == canonical_key(BufferSpec(kind, N).program().main)


def reachable_fill(rts, limit):
    """Largest number of stored values (ins minus outs) over reachable states."""
    succ = rts.action_succ()
    seen = {(rts.root, 0)}
    stack = [(rts.root, 0)]
    best = 0
    while stack:
        v, b = stack.pop()
        best = max(best, b)
        nxt = [(w, b + (a == IN) - (a == OUT)) for a, w in succ[v]]
        if v in rts.time:
            nxt.append((rts.time[v][1], b))
        for st in nxt:
            if st not in seen and st[1] <= limit:
                seen.add(st)
                stack.append(st)
    return best


@pytest.mark.parametrize("kind", ["fifo", "pipe", "buff"])
@pytest.mark.parametrize("N", [1, 2])
def test_capacity(kind, N):
    assert reachable_fill(build_rts(BufferSpec(kind, N).program()), N + 10) == N + 2


def test_builtin_specs():
    assert builtin("fifo:2").main == Var("FIFO0")
    assert builtin("user:1").definitions == {}
    with pytest.raises(ValueError):
        builtin("fifo")
    with pytest.raises(ValueError):
        builtin("heap:2")
    with pytest.raises(ValueError):
        BufferSpec("fifo", 0)
