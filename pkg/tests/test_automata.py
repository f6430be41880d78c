import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxdelay import generate as gen
from maxdelay.automata import (
    And,
    Bounded,
    Const,
    Inc,
    LassoWord,
    Max,
    MaxAutomaton,
    Not,
    Or,
    Reset,
    StructureError,
    accepts_lasso,
    accepts_lasso_oracle,
    apply_ops,
    equivalent,
    min_parity_formula,
    parity_automaton,
    run_finite,
    unbounded_counters,
)

from conftest import example


def test_apply_ops_examples():
    v = apply_ops({"a": 3, "b": 5, "c": 0}, [Inc("a"), Max("c", "a", "b"), Reset("b")])
    assert v == {"a": 4, "b": 0, "c": 5}


def test_apply_ops_rejects_unknown_counter():
    with pytest.raises(StructureError):
        apply_ops({"a": 0}, [Inc("z")])


def test_formula_evaluation_and_nnf():
    phi = Not(And((Bounded("a"), Or((Not(Bounded("b")), Const(False))))))
    for a in (True, False):
        for b in (True, False):
            env = {"a": a, "b": b}
            assert phi.evaluate(env) == (not (a and not b))
            assert phi.nnf().evaluate(env) == phi.evaluate(env)
            assert phi.nnf(negate=True).evaluate(env) != phi.evaluate(env)
    assert equivalent(phi, Not(Bounded("a")) | Bounded("b"), ["a", "b"])


def test_incomplete_automaton_rejected():
    with pytest.raises(StructureError, match="incomplete"):
        MaxAutomaton(("q",), (), ("a", "b"), "q", {("q", "a"): "q"}, {})


def test_undeclared_counter_rejected():
    with pytest.raises(StructureError):
        MaxAutomaton(("q",), (), ("a",), "q", {("q", "a"): "q"}, {("q", "a"): (Inc("c"),)})


def test_run_finite():
    A = example("limsup")
    run = run_finite(A, "q", "aabaaa")
    assert run.valuation == {"c": 3, "d": 1}


def test_limsup_example_lassos():
    A = example("limsup")
    assert not accepts_lasso(A, LassoWord((), tuple("ab")))
    assert unbounded_counters(A, LassoWord((), tuple("ab"))) == {"c": False, "d": True}
    # only a's: c unbounded but d bounded
    assert not accepts_lasso(A, LassoWord(tuple("b"), ("a",)))


def test_trivial_example_accepts_everything():
    A = example("trivial")
    assert accepts_lasso(A, LassoWord((), ("a",)))


def test_mid_loop_growth_counts():
    # c grows inside each loop iteration and is reset at its end
    A = MaxAutomaton(
        ("p", "q"), ("c",), ("a",), "p",
        {("p", "a"): "q", ("q", "a"): "p"},
        {("p", "a"): (Inc("c"),), ("q", "a"): (Reset("c"),)},
        Bounded("c"),
    )
    assert accepts_lasso(A, LassoWord((), ("a",)))
    B = MaxAutomaton(
        ("p",), ("c", "d"), ("a",), "p", {("p", "a"): "p"},
        {("p", "a"): (Inc("d"), Max("c", "d", "d"), Reset("c"))}, Bounded("d"),
    )
    assert not accepts_lasso(B, LassoWord((), ("a",)))
    assert unbounded_counters(B, LassoWord((), ("a",))) == {"c": False, "d": True}


def test_odd_cycle_idempotent():
    # max rotates three counters; the loop profile has a cyclic part of length 3
    counters = ("x", "y", "z")
    ops = (Max("t", "x", "x"), Max("x", "y", "y"), Max("y", "z", "z"), Max("z", "t", "t"), Inc("x"))
    A = MaxAutomaton(("p",), counters + ("t",), ("a",), "p", {("p", "a"): "p"}, {("p", "a"): ops}, Bounded("x"))
    w = LassoWord((), ("a",))
    assert accepts_lasso(A, w) == accepts_lasso_oracle(A, w)
    assert not accepts_lasso(A, w)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**31))
def test_lasso_representation_invariance(seed):
    rng = random.Random(seed)
    A = gen.random_automaton(rng)
    w = gen.random_lasso(rng, A.alphabet)
    base = accepts_lasso(A, w)
    assert accepts_lasso(A, LassoWord(w.prefix + w.loop, w.loop)) == base
    assert accepts_lasso(A, LassoWord(w.prefix, w.loop * 2)) == base


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31))
def test_lasso_matches_simulation(seed):
    rng = random.Random(seed)
    A = gen.random_automaton(rng)
    w = gen.random_lasso(rng, A.alphabet)
    assert accepts_lasso(A, w) == accepts_lasso_oracle(A, w)


def test_lasso_rejects_foreign_letters():
    with pytest.raises(StructureError):
        accepts_lasso(example("limsup"), LassoWord((), ("z",)))
    with pytest.raises(StructureError):
        LassoWord((), ())


def test_min_parity_formula_semantics():
    colors = {"c0": 0, "c1": 1, "c2": 2}
    phi = min_parity_formula(colors)
    for mask in range(8):
        bounded = {c: not (mask >> i) & 1 for i, c in enumerate(colors)}
        unb = [colors[c] for c in colors if not bounded[c]]
        expected = (min(unb) % 2 == 0) if unb else True
        assert phi.evaluate(bounded) == expected


def test_parity_automaton_buchi():
    # states p (color 2) and q (color 1); 'a' goes to p, 'b' to q
    A = parity_automaton(("p", "q"), ("a", "b"), "p",
                         {(s, x): ("p" if x == "a" else "q") for s in "pq" for x in "ab"},
                         {"p": 2, "q": 1})
    assert accepts_lasso(A, LassoWord((), ("a",)))
    assert not accepts_lasso(A, LassoWord((), ("a", "b")))
    assert not accepts_lasso(A, LassoWord((), ("b",)))
