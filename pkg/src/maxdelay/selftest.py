"""Randomized consistency suite behind ``maxdelay selftest``."""
from __future__ import annotations

import random
import time
from typing import Iterator, Tuple

from . import generate as gen
from .automata import accepts_lasso, accepts_lasso_oracle
from .equivalence import compose, identity_profile, profile_of_block, profile_of_lambda_word, rel_subset, union_rel
from .equivalence import identity_rel, word_class, build_tracker
from .oracles import classes_of_short_words, factor_swap_agrees, prefix_pairs, transfer_inc_pairs, transfer_pairs
from .reduction import ProductAutomaton
from .verify import lemma4_battery


def check_lasso_oracle(rng: random.Random, n: int) -> Tuple[int, int]:
    bad = 0
    for _ in range(n):
        A = gen.random_automaton(rng)
        w = gen.random_lasso(rng, A.alphabet)
        bad += accepts_lasso(A, w) != accepts_lasso_oracle(A, w)
    return n, bad


def check_profiles(rng: random.Random, n: int) -> Tuple[int, int]:
    bad = 0
    for _ in range(n):
        k = rng.randint(1, 3)
        counters = tuple(f"c{i}" for i in range(k))
        blocks = [gen.random_ops(rng, counters, 3) for _ in range(rng.randint(0, 3))]
        flat = [op for b in blocks for op in b][:8]
        blocks = _cut(blocks, len(flat))
        p = profile_of_lambda_word(blocks, counters)
        t, ti, pre = p.pairs(counters)
        ok = t == transfer_pairs(flat, counters) and ti == transfer_inc_pairs(flat, counters)
        ok &= pre == prefix_pairs(blocks, counters)
        ok &= rel_subset(p.transfer_inc, p.transfer)
        ok &= rel_subset(union_rel(identity_rel(k), p.transfer), p.prefix_transfer)
        q = profile_of_block(gen.random_ops(rng, counters), counters)
        r = profile_of_block(gen.random_ops(rng, counters), counters)
        ok &= compose(compose(p, q), r) == compose(p, compose(q, r))
        e = identity_profile(k)
        ok &= compose(e, p) == p == compose(p, e)
        bad += not ok
    return n, bad


def _cut(blocks, limit):
    out, used = [], 0
    for b in blocks:
        if used >= limit:
            break
        out.append(tuple(b[: limit - used]))
        used += len(out[-1])
    return out


def check_tracker(rng: random.Random, n_aut: int, n_words: int) -> Tuple[int, int]:
    checked = bad = 0
    for _ in range(n_aut):
        A = gen.random_automaton(rng, max_states=3, max_counters=2)
        T = build_tracker(A)
        for _ in range(n_words):
            w = gen.random_word(rng, A.alphabet, 10)
            checked += 1
            bad += T.classes[T.run(w)].key != word_class(A, w).key
    return checked, bad


def check_factor_swap(rng: random.Random, n: int) -> Tuple[int, int]:
    checked = bad = 0
    while checked < n:
        A = gen.random_automaton(rng, max_states=3, max_counters=2)
        groups = classes_of_short_words(A, 4)
        partner = {w: ws for ws in groups.values() for w in ws}
        m = rng.randint(2, 4)
        split = rng.randint(0, m - 1)
        factors = [gen.random_word(rng, A.alphabet, 4, 1) for _ in range(m)]
        swapped = [rng.choice([v for v in partner[f] if v]) for f in factors]
        a, b = factor_swap_agrees(A, factors, swapped, split)
        checked += 1
        bad += a != b
    return checked, bad


def run_selftest(seed: int = 0, scale: float = 1.0) -> Iterator[Tuple[str, bool, str]]:
    rng = random.Random(seed)

    def sized(x):
        return max(1, int(x * scale))

    def timed(name, fn, *args):
        t = time.perf_counter()
        checked, bad = fn(rng, *args)
        return name, bad == 0, f"{checked} cases, {bad} failures, {time.perf_counter() - t:.1f}s"

    yield timed("lasso acceptance vs simulation", check_lasso_oracle, sized(1000))
    yield timed("profile algebra", check_profiles, sized(500))
    yield timed("tracker vs direct classes", check_tracker, sized(10), sized(200))
    yield timed("factor swaps preserve acceptance", check_factor_swap, sized(100))
    t = time.perf_counter()
    failures = 0
    count = 0
    while count < sized(20):
        A = gen.random_paired_automaton(rng)
        P = ProductAutomaton(A)
        if len(P.reachable_states) > 40:
            continue
        count += 1
        res = lemma4_battery(P, seed=rng.randrange(2**31), words_disjoint=sized(200), words_complete=sized(100))
        failures += not all(r.passed for r in res.values())
    yield "witness-language battery", failures == 0, f"{count} instances, {failures} failing, {time.perf_counter() - t:.1f}s"
