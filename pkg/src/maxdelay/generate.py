"""Seeded random instances for property tests and the self-test."""
from __future__ import annotations

import random
from typing import Sequence

from .automata import And, Bounded, Const, Inc, LassoWord, Max, MaxAutomaton, Not, Or, Reset


def random_ops(rng: random.Random, counters: Sequence[str], max_ops: int = 3) -> tuple:
    if not counters:
        return ()
    out = []
    for _ in range(rng.randint(0, max_ops)):
        kind = rng.randrange(3)
        c = rng.choice(counters)
        if kind == 0:
            out.append(Inc(c))
        elif kind == 1:
            out.append(Reset(c))
        else:
            out.append(Max(c, rng.choice(counters), rng.choice(counters)))
    return tuple(out)


def random_formula(rng: random.Random, counters: Sequence[str], depth: int = 3):
    if not counters:
        return Const(rng.random() < 0.5)
    if depth == 0 or rng.random() < 0.3:
        atom = Bounded(rng.choice(counters))
        return Not(atom) if rng.random() < 0.5 else atom
    kind = rng.randrange(3)
    if kind == 0:
        return Not(random_formula(rng, counters, depth - 1))
    parts = tuple(random_formula(rng, counters, depth - 1) for _ in range(2))
    return And(parts) if kind == 1 else Or(parts)


def random_automaton(rng: random.Random, max_states: int = 4, max_counters: int = 3, letters: Sequence = ("a", "b"),
                     max_ops: int = 3, min_counters: int = 0) -> MaxAutomaton:
    n = rng.randint(1, max_states)
    k = rng.randint(min_counters, max_counters)
    states = tuple(f"q{i}" for i in range(n))
    counters = tuple(f"c{i}" for i in range(k))
    alphabet = tuple(letters)
    delta, labels = {}, {}
    for q in states:
        for a in alphabet:
            delta[q, a] = rng.choice(states)
            labels[q, a] = random_ops(rng, counters, max_ops)
    return MaxAutomaton(states, counters, alphabet, states[0], delta, labels, random_formula(rng, counters))


def random_paired_automaton(rng: random.Random, ins: Sequence = ("0", "1"), outs: Sequence = ("0", "1"),
                            max_states: int = 3, max_counters: int = 2, max_ops: int = 2) -> MaxAutomaton:
    letters = tuple((a, b) for a in ins for b in outs)
    return random_automaton(rng, max_states, max_counters, letters, max_ops)


def random_word(rng: random.Random, alphabet: Sequence, max_len: int, min_len: int = 0) -> tuple:
    return tuple(rng.choice(alphabet) for _ in range(rng.randint(min_len, max_len)))


def random_lasso(rng: random.Random, alphabet: Sequence, max_prefix: int = 6, max_loop: int = 6) -> LassoWord:
    return LassoWord(random_word(rng, alphabet, max_prefix), random_word(rng, alphabet, max_loop, 1))
