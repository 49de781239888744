"""Bounded-buffer implementations of capacity N+2 and the user family U_n.

Action naming in generated programs: ``d<i>`` for the pipe's cell-to-cell
transfers, ``w<i>`` / ``r<i>`` for writing and reading storage cell ``i`` of
buff, ``omega`` for the user's success action.
"""
from __future__ import annotations

from dataclasses import dataclass

from .parser import render
from .syntax import (
    IN,
    NIL,
    OMEGA,
    OUT,
    Choice,
    Parallel,
    Prefix,
    ProgramEnv,
    Relabel,
    RelabelFn,
    Var,
    hide,
    urgent,
)

KINDS = ("fifo", "pipe", "buff")


@dataclass(frozen=True)
class BufferSpec:
    kind: str
    N: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown buffer kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be at least 1")

    @property
    def capacity(self) -> int:
        return self.N + 2

    def program(self) -> ProgramEnv:
        return GENERATORS[self.kind](self.N)


def _check_n(N):
    if N < 1:
        raise ValueError("N must be at least 1")


def fifo_name(i):
    return f"FIFO{i}"


def gen_fifo(N: int) -> ProgramEnv:
    """Sequential queue: states 0..N+2 counting stored values."""
    _check_n(N)
    top = N + 2
    defs = {fifo_name(0): Prefix(IN, Var(fifo_name(1)))}
    for i in range(1, top):
        defs[fifo_name(i)] = Choice(Prefix(IN, Var(fifo_name(i + 1))), Prefix(OUT, Var(fifo_name(i - 1))))
    defs[fifo_name(top)] = Prefix(OUT, Var(fifo_name(top - 1)))
    return ProgramEnv(defs, Var(fifo_name(0)))


def delta(i):
    return f"d{i}"


def pipe_relabel(i: int, N: int) -> RelabelFn:
    m = {}
    if 0 <= i <= N:
        m[IN] = delta(i)
    if 1 <= i <= N + 1:
        m[OUT] = delta(i - 1)
    return RelabelFn.from_mapping(m)


def gen_pipe(N: int) -> ProgramEnv:
    """N+2 one-place cells chained end to end; input at cell N+1, output at cell 0."""
    _check_n(N)
    defs = {"C": Prefix(IN, Var("Cf")), "Cf": Prefix(OUT, Var("C"))}
    t = Relabel(Var("C"), pipe_relabel(0, N))
    for i in range(1, N + 2):
        t = Parallel(t, Relabel(Var("C"), pipe_relabel(i, N)), frozenset({delta(i - 1)}))
    t = hide(t, [delta(j) for j in range(N + 2)])
    return ProgramEnv(defs, t)


def write(i):
    return f"w{i}"


def read(i):
    return f"r{i}"


def bc_name(x: bool, y: bool, i: int, m: int) -> str:
    """Controller state; ``x``/``y`` true when an input/output value is held."""
    return f"BC{'F' if x else 'E'}{'F' if y else 'E'}_{i}_{m}"


def gen_buff(N: int) -> ProgramEnv:
    """Controller with an input and an output slot over N storage cells used circularly."""
    _check_n(N)

    def nx(a, b):
        return (a + b) % N

    def bc(x, y, i, m):
        return Var(bc_name(x, y, i, m))

    defs = {"C": Prefix(IN, Var("Cf")), "Cf": Prefix(OUT, Var("C"))}
    for i in range(N):
        for m in range(N + 1):
            # empty input slot, empty output slot
            if m == 0:
                body = Prefix(IN, bc(True, False, i, 0))
            else:
                body = Choice(Prefix(IN, bc(True, False, i, m)),
                              Prefix(read(i), bc(False, True, nx(i, 1), m - 1)))
            defs[bc_name(False, False, i, m)] = body
            # input held, output slot empty
            if m == 0:
                body = Prefix(write(i), bc(False, False, i, 1))
            elif m < N:
                body = Choice(Prefix(write(nx(i, m)), bc(False, False, i, m + 1)),
                              Prefix(read(i), bc(True, True, nx(i, 1), m - 1)))
            else:
                body = Prefix(read(i), bc(True, True, nx(i, 1), N - 1))
            defs[bc_name(True, False, i, m)] = body
            # output held, input slot empty
            defs[bc_name(False, True, i, m)] = Choice(Prefix(IN, bc(True, True, i, m)),
                                                       Prefix(OUT, bc(False, False, i, m)))
            # both held
            if m < N:
                body = Choice(Prefix(write(nx(i, m)), bc(False, True, i, m + 1)),
                              Prefix(OUT, bc(True, False, i, m)))
            else:
                body = Prefix(OUT, bc(True, False, i, N))
            defs[bc_name(True, True, i, m)] = body
    mem = Relabel(Var("C"), RelabelFn.from_mapping({IN: write(0), OUT: read(0)}))
    for i in range(1, N):
        mem = Parallel(mem, Relabel(Var("C"), RelabelFn.from_mapping({IN: write(i), OUT: read(i)})),
                       frozenset())
    B = [a for j in range(N) for a in (write(j), read(j))]
    main = hide(Parallel(mem, bc(False, False, 0, 0), frozenset(B)), B)
    return ProgramEnv(defs, main)


def user_thread():
    return urgent(IN, urgent(OUT, urgent(OMEGA, NIL)))


def gen_user(n: int):
    """n urgent request threads synchronised on omega."""
    if n < 1:
        raise ValueError("n must be at least 1")
    t = user_thread()
    for _ in range(1, n):
        t = Parallel(t, user_thread(), frozenset({OMEGA}))
    return t


GENERATORS = {"fifo": gen_fifo, "pipe": gen_pipe, "buff": gen_buff}


def gen_source(kind: str, N: int) -> str:
    header = f"# {kind} buffer, N = {N} (capacity {N + 2})\n"
    return header + render(GENERATORS[kind](N))


def builtin(spec: str):
    """``kind:N`` for a buffer or ``user:n``; returns a ProgramEnv."""
    kind, _, num = spec.partition(":")
    try:
        k = int(num)
    except ValueError:
        raise ValueError(f"bad builtin spec {spec!r}; expected kind:N") from None
    if kind == "user":
        return ProgramEnv({}, gen_user(k))
    if kind not in GENERATORS:
        raise ValueError(f"unknown builtin kind {kind!r}")
    return GENERATORS[kind](k)
