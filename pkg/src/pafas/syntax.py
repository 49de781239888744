"""Abstract syntax of PAFAS terms.

Actions are plain strings. ``TAU`` is the internal action; every other string
is a visible action. Terms are immutable and hash-consed enough (cached hashes)
to be used as dictionary keys during state-space generation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

TAU = "tau"
OMEGA = "omega"
IN = "in"
OUT = "out"

RESERVED = frozenset({"tau", "rec", "main"})


class WellFormednessError(Exception):
    """Base class for closedness/guardedness violations."""

    def __init__(self, name: str, subterm: "Term", message: str):
        self.name = name
        self.subterm = subterm
        super().__init__(message)


class UnboundVariable(WellFormednessError):
    def __init__(self, name, subterm):
        super().__init__(name, subterm, f"unbound variable {name!r} in {render_term(subterm)}")


class UnguardedRecursion(WellFormednessError):
    def __init__(self, name, subterm):
        super().__init__(
            name, subterm,
            f"unguarded recursion on {name!r}: occurrence not under a prefix in {render_term(subterm)}",
        )


class ShadowedDefinition(WellFormednessError):
    def __init__(self, name, subterm):
        super().__init__(
            name, subterm, f"rec binder {name!r} shadows a definition of the same name"
        )


# --------------------------------------------------------------------------
# sync sets and relabelling


class _AllButOmega:
    """The co-finite sync set of every visible action except omega."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __contains__(self, action):
        return action != TAU and action != OMEGA

    def __repr__(self):
        return "ALL_BUT_OMEGA"

    def __reduce__(self):
        return (_AllButOmega, ())


ALL_BUT_OMEGA = _AllButOmega()


def sync_set(actions: Iterable[str]) -> frozenset:
    s = frozenset(actions)
    if TAU in s:
        raise ValueError("tau cannot be a synchronisation action")
    return s


@dataclass(frozen=True)
class RelabelFn:
    """Finite relabelling; identity outside ``pairs``. Hiding maps to ``TAU``."""

    pairs: tuple = ()

    def __post_init__(self):
        cleaned = tuple(sorted((a, b) for a, b in dict(self.pairs).items() if a != b))
        if any(a == TAU for a, _ in cleaned):
            raise ValueError("tau must be mapped to tau")
        object.__setattr__(self, "pairs", cleaned)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "RelabelFn":
        return cls(tuple(mapping.items()))

    @classmethod
    def hiding(cls, actions: Iterable[str]) -> "RelabelFn":
        return cls(tuple((a, TAU) for a in actions))

    @property
    def mapping(self) -> dict:
        return dict(self.pairs)

    @property
    def is_hiding(self) -> bool:
        return bool(self.pairs) and all(b == TAU for _, b in self.pairs)

    def __call__(self, action: str) -> str:
        for a, b in self.pairs:
            if a == action:
                return b
        return action


def apply_relabel(fn: RelabelFn, action: str) -> str:
    return fn(action)


# --------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()


def _cached_hash(obj, *parts):
    object.__setattr__(obj, "_h", hash((type(obj).__name__,) + parts))


@dataclass(frozen=True, eq=True)
class Nil(Term):
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cached_hash(self)

    def __hash__(self):
        return self._h


@dataclass(frozen=True, eq=True)
class Prefix(Term):
    action: str
    body: Term
    urgent: bool = False
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cached_hash(self, self.action, self.body, self.urgent)

    def __hash__(self):
        return self._h


@dataclass(frozen=True, eq=True)
class Choice(Term):
    left: Term
    right: Term
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cached_hash(self, self.left, self.right)

    def __hash__(self):
        return self._h


@dataclass(frozen=True, eq=True)
class Parallel(Term):
    left: Term
    right: Term
    sync: object = frozenset()  # frozenset of actions or ALL_BUT_OMEGA
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.sync is not ALL_BUT_OMEGA:
            object.__setattr__(self, "sync", sync_set(self.sync))
        _cached_hash(self, self.left, self.right, self.sync)

    def __hash__(self):
        return self._h


@dataclass(frozen=True, eq=True)
class Relabel(Term):
    body: Term
    fn: RelabelFn
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cached_hash(self, self.body, self.fn)

    def __hash__(self):
        return self._h


@dataclass(frozen=True, eq=True)
class Var(Term):
    """A recursion variable, or a reference to a named definition."""

    name: str
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cached_hash(self, self.name)

    def __hash__(self):
        return self._h


@dataclass(frozen=True, eq=True)
class Rec(Term):
    name: str
    body: Term
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cached_hash(self, self.name, self.body)

    def __hash__(self):
        return self._h


NIL = Nil()


def prefix(action, body=NIL, urgent=False):
    return Prefix(action, body, urgent)


def urgent(action, body=NIL):
    return Prefix(action, body, True)


def hide(body, actions):
    return Relabel(body, RelabelFn.hiding(actions))


@dataclass
class ProgramEnv:
    """Named defining equations plus the entry term."""

    definitions: dict = field(default_factory=dict)
    main: Term = NIL

    def __post_init__(self):
        self.definitions = dict(self.definitions)


# --------------------------------------------------------------------------
# structural helpers


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset({t.name})
    if isinstance(t, Nil):
        return frozenset()
    if isinstance(t, Prefix):
        return free_vars(t.body)
    if isinstance(t, Relabel):
        return free_vars(t.body)
    if isinstance(t, (Choice, Parallel)):
        return free_vars(t.left) | free_vars(t.right)
    if isinstance(t, Rec):
        return free_vars(t.body) - {t.name}
    raise TypeError(t)


def substitute(t: Term, name: str, value: Term) -> Term:
    """``t{value/name}``; ``value`` must have no free recursion variables."""
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Nil):
        return t
    if isinstance(t, Prefix):
        b = substitute(t.body, name, value)
        return t if b is t.body else Prefix(t.action, b, t.urgent)
    if isinstance(t, Choice):
        l, r = substitute(t.left, name, value), substitute(t.right, name, value)
        return t if (l is t.left and r is t.right) else Choice(l, r)
    if isinstance(t, Parallel):
        l, r = substitute(t.left, name, value), substitute(t.right, name, value)
        return t if (l is t.left and r is t.right) else Parallel(l, r, t.sync)
    if isinstance(t, Relabel):
        b = substitute(t.body, name, value)
        return t if b is t.body else Relabel(b, t.fn)
    if isinstance(t, Rec):
        if t.name == name:
            return t
        b = substitute(t.body, name, value)
        return t if b is t.body else Rec(t.name, b)
    raise TypeError(t)


def unfold(t: Rec) -> Term:
    return substitute(t.body, t.name, t)


def subterms(t: Term):
    yield t
    if isinstance(t, (Prefix, Relabel, Rec)):
        yield from subterms(t.body)
    elif isinstance(t, (Choice, Parallel)):
        yield from subterms(t.left)
        yield from subterms(t.right)


def actions_of(t: Term, definitions: Mapping | None = None) -> set:
    """Every action name occurring syntactically (prefixes, sync sets, relabel maps)."""
    definitions = definitions or {}
    seen_defs = set()
    out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        for s in subterms(u):
            if isinstance(s, Prefix):
                out.add(s.action)
            elif isinstance(s, Parallel) and s.sync is not ALL_BUT_OMEGA:
                out |= s.sync
            elif isinstance(s, Relabel):
                for a, b in s.fn.pairs:
                    out.add(a)
                    out.add(b)
            elif isinstance(s, Var) and s.name in definitions and s.name not in seen_defs:
                seen_defs.add(s.name)
                stack.append(definitions[s.name])
    return out


# --------------------------------------------------------------------------
# well-formedness


def _check_term(t, bound, defs, unguarded, where, top):
    """Walk ``t``; ``unguarded`` is the set of binders not yet under a prefix.

    Returns the definition names referenced without an intervening prefix.
    """
    if isinstance(t, Nil):
        return set()
    if isinstance(t, Var):
        if t.name in bound:
            if t.name in unguarded:
                raise UnguardedRecursion(t.name, where)
            return set()
        if t.name in defs:
            return {t.name}
        raise UnboundVariable(t.name, top)
    if isinstance(t, Prefix):
        _check_term(t.body, bound, defs, frozenset(), where, top)
        return set()
    if isinstance(t, (Choice, Parallel)):
        return (_check_term(t.left, bound, defs, unguarded, where, top)
                | _check_term(t.right, bound, defs, unguarded, where, top))
    if isinstance(t, Relabel):
        return _check_term(t.body, bound, defs, unguarded, where, top)
    if isinstance(t, Rec):
        if t.name in defs:
            raise ShadowedDefinition(t.name, t)
        return _check_term(t.body, bound | {t.name}, defs, unguarded | {t.name}, t, top)
    raise TypeError(t)


def check_well_formed(env: ProgramEnv) -> ProgramEnv:
    """Reject free variables and recursion not guarded by a prefix.

    Definitions act as global recursion binders: a cycle of definition
    references that never passes a prefix is unguarded recursion.
    """
    defs = env.definitions
    for name in defs:
        if name in RESERVED:
            raise ValueError(f"reserved word {name!r} used as a definition name")
    direct = {}
    for name, body in defs.items():
        direct[name] = _check_term(body, frozenset(), defs, frozenset(), body, body)
    _check_term(env.main, frozenset(), defs, frozenset(), env.main, env.main)

    # unguarded definition cycles
    state = {}

    def visit(n, path):
        state[n] = 1
        for m in sorted(direct[n]):
            if state.get(m) == 1:
                raise UnguardedRecursion(m, defs[m])
            if m not in state:
                visit(m, path + [m])
        state[n] = 2

    for n in defs:
        if n not in state:
            visit(n, [n])
    return env


# --------------------------------------------------------------------------
# canonical printing


def _sync_text(sync) -> str:
    if sync is ALL_BUT_OMEGA:
        return "||"
    return "|[" + ",".join(sorted(sync)) + "]|"


def _fn_text(fn: RelabelFn) -> str:
    if fn.is_hiding:
        return " / {" + ",".join(a for a, _ in fn.pairs) + "}"
    return "[" + ",".join(f"{a}->{b}" for a, b in fn.pairs) + "]"


def _key(t, ctx):
    # ctx: tuple of bound names, innermost last
    if isinstance(t, Nil):
        return "0"
    if isinstance(t, Var):
        for depth, name in enumerate(reversed(ctx)):
            if name == t.name:
                return f"#{depth}"
        return t.name
    if isinstance(t, Prefix):
        return ("_" if t.urgent else "") + t.action + "." + _key(t.body, ctx)
    if isinstance(t, Choice):
        return "(" + _key(t.left, ctx) + " + " + _key(t.right, ctx) + ")"
    if isinstance(t, Parallel):
        return "(" + _key(t.left, ctx) + " " + _sync_text(t.sync) + " " + _key(t.right, ctx) + ")"
    if isinstance(t, Relabel):
        return "(" + _key(t.body, ctx) + ")" + _fn_text(t.fn)
    if isinstance(t, Rec):
        return "(rec." + _key(t.body, ctx + (t.name,)) + ")"
    raise TypeError(t)


_KEY_CACHE: dict = {}


def canonical_key(t: Term) -> str:
    """Deterministic text with de Bruijn-numbered recursion variables.

    Only alpha-renaming is factored out; no algebraic laws are applied.
    """
    k = _KEY_CACHE.get(t)
    if k is None:
        k = _key(t, ())
        if len(_KEY_CACHE) > 500_000:
            _KEY_CACHE.clear()
        _KEY_CACHE[t] = k
    return k


# --------------------------------------------------------------------------
# source rendering (re-parseable)


def render_term(t: Term, level: int = 0) -> str:
    """Concrete syntax. ``level``: 0 parallel, 1 choice, 2 postfix, 3 prefix/atom."""
    if isinstance(t, Nil):
        return "0"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Rec):
        return f"(rec {t.name}. {render_term(t.body, 0)})"
    if isinstance(t, Prefix):
        s = ("_" if t.urgent else "") + t.action + "." + render_term(t.body, 3)
        return s
    if isinstance(t, Relabel):
        s = render_term(t.body, 2) + _fn_text(t.fn)
        return s if level <= 2 else f"({s})"
    if isinstance(t, Choice):
        s = render_term(t.left, 1) + " + " + render_term(t.right, 2)
        return s if level <= 1 else f"({s})"
    if isinstance(t, Parallel):
        s = render_term(t.left, 0) + " " + _sync_text(t.sync) + " " + render_term(t.right, 1)
        return s if level == 0 else f"({s})"
    raise TypeError(t)
