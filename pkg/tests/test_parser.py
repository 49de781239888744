import pytest
from hypothesis import given
import hypothesis.strategies as st

from pafas.parser import ParseError, parse, parse_file, parse_term, render
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
    canonical_key,
    check_well_formed,
)

from conftest import CORPUS


def test_definitions_and_main():
    env = parse("FIFO0 = in.FIFO1; FIFO1 = out.FIFO0; main FIFO0")
    assert list(env.definitions) == ["FIFO0", "FIFO1"]
    assert env.main == Var("FIFO0")
    assert env.definitions["FIFO1"] == Prefix("out", Var("FIFO0"))


def test_main_defaults_to_first_definition():
    assert parse("A = a.A; B = b.B;").main == Var("A")


def test_lazy_and_urgent_choice():
    assert parse_term("a.0 + _b.0") == Choice(Prefix("a", NIL), Prefix("b", NIL, urgent=True))


def test_hidden_parallel():
    t = parse_term("(C |[d0]| C) / {d0}")
    assert t == Relabel(Parallel(Var("C"), Var("C"), frozenset({"d0"})), RelabelFn.hiding(["d0"]))


def test_shorthand_parallel_and_relabel():
    t = parse_term("a.0 || b.0[b->c, a->tau]")
    assert isinstance(t, Parallel) and t.sync is ALL_BUT_OMEGA
    assert t.right == Relabel(Prefix("b", NIL), RelabelFn.from_mapping({"b": "c", "a": TAU}))


def test_precedence():
    # prefix binds tighter than choice, choice tighter than parallel
    t = parse_term("a.0 + b.0 |[a]| c.0")
    assert isinstance(t, Parallel) and isinstance(t.left, Choice)
    # parallel is left-associative
    t = parse_term("a.0 || b.0 || c.0")
    assert isinstance(t.left, Parallel)


def test_rec_extends_right():
    t = parse_term("rec x. a.x + b.0")
    assert isinstance(t, Rec) and isinstance(t.body, Choice)


def test_comments_ignored():
    env = parse("# header\nA = a.A; # trailing\nmain A # end\n")
    assert env.main == Var("A")


def test_render_urgent_sigil():
    assert "_b.0" in render(parse("main a.0 + _b.0"))


def test_render_sorted_hide():
    assert "/ {a,b,c}" in render(parse("main (a.0 || b.0 || c.0) / {c, a, b}"))


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("main a.", 1, 8),
        ("A = a.0\nmain A", 2, 1),
        ("main a.0 +\n  ", 2, 3),
        ("main (a.0", 1, 10),
        ("main a.0 $", 1, 10),
        ("main a.0 | b.0", 1, 10),
        ("main tau", 1, 6),
        ("main a.0 / {tau}", 1, 13),
    ],
)
def test_error_positions(text, line, col):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert (exc.value.line, exc.value.col) == (line, col)


@given(st.text(alphabet="ab0_.+|[]{}()/,->#rectau \n;=xm", max_size=40))
def test_errors_stay_in_bounds(text):
    try:
        parse(text)
    except ParseError as exc:
        lines = text.split("\n")
        assert 1 <= exc.line <= len(lines)
        assert 1 <= exc.col <= len(lines[exc.line - 1]) + 1


def test_parse_file_reports_name(tmp_path):
    p = tmp_path / "bad.pafas"
    p.write_text("main a.")
    with pytest.raises(ParseError) as exc:
        parse_file(p)
    assert str(p) in str(exc.value)


def test_corpus_roundtrip():
    files = sorted(CORPUS.glob("*.pafas"))
    assert files
    for f in files:
        env = check_well_formed(parse_file(f))
        again = parse(render(env))
        assert canonical_key(again.main) == canonical_key(env.main)
        assert {k: canonical_key(v) for k, v in again.definitions.items()} == \
            {k: canonical_key(v) for k, v in env.definitions.items()}


def test_every_production_parses():
    src = """
    # exercises every construct
    A = a.A + _b.0;
    B = (rec x. tau.x) |[a, b]| A;
    C = (B || 0)[a->c, b->tau] / {c};
    main C
    """
    env = check_well_formed(parse(src))
    assert set(env.definitions) == {"A", "B", "C"}
