import pytest
from hypothesis import given
import hypothesis.strategies as st

from pafas.casestudy import pipe_relabel
from pafas.parser import parse_term
from pafas.syntax import (
    NIL,
    TAU,
    Choice,
    Prefix,
    ProgramEnv,
    Rec,
    RelabelFn,
    ShadowedDefinition,
    UnboundVariable,
    UnguardedRecursion,
    Var,
    apply_relabel,
    canonical_key,
    check_well_formed,
    free_vars,
    render_term,
    sync_set,
)

from conftest import relabel_fns, terms


def wf(text):
    return check_well_formed(ProgramEnv({}, parse_term(text)))


def test_guarded_recursion_accepted():
    wf("rec x. a.x")


def test_unguarded_recursion_names_binder():
    with pytest.raises(UnguardedRecursion) as exc:
        wf("rec x. (x + a.0)")
    assert "x" in str(exc.value)


def test_free_variable_rejected():
    with pytest.raises(UnboundVariable):
        wf("a.y")


def test_unguarded_definition_cycle():
    env = ProgramEnv({"A": Var("B"), "B": Choice(Var("A"), Prefix("a", NIL))}, Var("A"))
    with pytest.raises(UnguardedRecursion):
        check_well_formed(env)


def test_guarded_definitions_ok():
    env = ProgramEnv({"A": Prefix("a", Var("B")), "B": Prefix("b", Var("A"))}, Var("A"))
    assert check_well_formed(env) is env


def test_binder_may_not_shadow_definition():
    env = ProgramEnv({"A": Prefix("a", NIL)}, Rec("A", Prefix("b", Var("A"))))
    with pytest.raises(ShadowedDefinition):
        check_well_formed(env)


def test_tau_cannot_sync():
    with pytest.raises(ValueError):
        sync_set(["a", TAU])


# relabelling


def test_pipe_input_map():
    assert apply_relabel(pipe_relabel(0, 3), "in") == "d0"


def test_pipe_maps_are_finite():
    for i in range(5):
        assert len(pipe_relabel(i, 3).pairs) <= 2


def test_hiding_maps_to_tau():
    assert apply_relabel(RelabelFn.hiding(["d0"]), "d0") == TAU
    assert RelabelFn.hiding(["d0"]).is_hiding


@given(relabel_fns, st.sampled_from(["a", "b", "c", "zz", TAU]))
def test_relabel_total_and_tau_fixed(fn, a):
    b = fn(a)
    assert isinstance(b, str)
    if a == TAU:
        assert b == TAU
    if b == a:
        assert fn(fn(a)) == a


def test_tau_source_rejected():
    with pytest.raises(ValueError):
        RelabelFn.from_mapping({TAU: "a"})


# canonical keys


def test_alpha_equivalent_keys():
    assert canonical_key(parse_term("rec x. a.x")) == canonical_key(parse_term("rec y. a.y"))


def test_choice_not_normalised():
    assert canonical_key(parse_term("a.0 + b.0")) != canonical_key(parse_term("b.0 + a.0"))


def test_nil_key():
    assert canonical_key(NIL) == "0"


def test_nested_binders_distinguished():
    k1 = canonical_key(parse_term("rec x. rec y. a.x"))
    k2 = canonical_key(parse_term("rec x. rec y. a.y"))
    assert k1 != k2


@given(terms())
def test_render_roundtrip(t):
    assert canonical_key(parse_term(render_term(t))) == canonical_key(t)


@given(terms())
def test_generated_terms_closed(t):
    assert not free_vars(t)
    check_well_formed(ProgramEnv({}, t))
