import pytest

from maxdelay.automata import Bounded, Inc, Max, Not, Reset
from maxdelay.textformat import ParseError, dumps, format_ops, load, loads, parse_formula, parse_ops, parse_word

from conftest import DATA

SHIPPED = sorted(p.stem for p in DATA.glob("*.max"))


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_examples_round_trip(name):
    A = load(DATA / f"{name}.max")
    B = loads(dumps(A))
    assert A == B
    assert dumps(B) == dumps(A)


def test_ops_round_trip():
    ops = (Inc("a"), Reset("b"), Max("a", "b", "c"))
    assert parse_ops(format_ops(ops)) == ops
    assert parse_ops("[]") == ()


def test_formula_parsing_precedence():
    f = parse_formula("B(a) | !B(b) & B(c)")
    assert f.evaluate({"a": False, "b": False, "c": True}) is True
    assert f.evaluate({"a": False, "b": True, "c": True}) is False
    assert parse_formula("!B(x)") == Not(Bounded("x"))
    with pytest.raises(ValueError):
        parse_formula("B(a) &")


def test_hash_is_a_letter():
    text = """maxautomaton
# comment line
alphabet_in: 0 1 #
alphabet_out: 0 *
states: s
initial: s
trans: s 0|0 -> s []
trans: s 0|* -> s []
trans: s 1|0 -> s []
trans: s 1|* -> s []
trans: s #|0 -> s []
trans: s #|* -> s []
"""
    A = loads(text)
    assert ("#", "*") in A.alphabet
    assert parse_word("#|* 0|0", A) == (("#", "*"), ("0", "0"))


def test_errors_carry_line_numbers():
    text = "maxautomaton\nalphabet: a\nstates: q\ninitial: q\ntrans: q a -> r []\n"
    with pytest.raises(ParseError) as e:
        loads(text, "x.max")
    assert e.value.line == 5
    assert "x.max:5" in str(e.value)


@pytest.mark.parametrize("text", [
    "nope\n",
    "maxautomaton\nalphabet: a\nalphabet: b\n",
    "maxautomaton\ncolour: red\n",
    "maxautomaton\nalphabet: a b\nstates: q\ninitial: q\ntrans: q a -> q []\n",
    "maxautomaton\nalphabet: a\nstates: q\ninitial: q\ntrans: q a -> q [inc z]\n",
    "",
])
def test_malformed_inputs(text):
    with pytest.raises(ParseError):
        loads(text)


def test_missing_file():
    with pytest.raises(ParseError):
        load("/nonexistent/file.max")


def test_word_splitting():
    A = load(DATA / "limsup.max")
    assert parse_word("abba", A) == tuple("abba")
    assert parse_word("a b", A) == ("a", "b")
    with pytest.raises(ValueError):
        parse_word("abz", A)
