"""Slow reference implementations used to cross-check the fast machinery."""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Dict, List, Sequence, Tuple

from .automata import Inc, LassoWord, Max, MaxAutomaton, Reset, accepts_lasso
from .equivalence import word_class


def transfer_pairs(ops: Sequence, counters: Sequence[str]) -> frozenset:
    """Pairs ``(c, d)`` such that ``ops`` transfers ``c`` to ``d``, by the inductive definition.

    Every split into two nonempty parts is tried, so the search does not
    assume that transfer composes along a fixed decomposition.
    """
    ops = tuple(ops)
    counters = tuple(counters)

    @lru_cache(maxsize=None)
    def rel(i, j) -> frozenset:
        if j == i:
            return frozenset((c, c) for c in counters)
        if j == i + 1:
            op = ops[i]
            if isinstance(op, Inc):
                return frozenset((c, c) for c in counters)
            if isinstance(op, Reset):
                return frozenset((c, c) for c in counters if c != op.c)
            if isinstance(op, Max):
                keep = {(c, c) for c in counters if c != op.c}
                return frozenset(keep | {(op.c0, op.c), (op.c1, op.c)})
            raise TypeError(op)
        out = set()
        for m in range(i + 1, j):
            left, right = rel(i, m), rel(m, j)
            out.update((c, d) for c, e in left for e2, d in right if e == e2)
        return frozenset(out)

    return rel(0, len(ops))


def transfer_inc_pairs(ops: Sequence, counters: Sequence[str]) -> frozenset:
    """Pairs with a decomposition ``pi0 inc(e) pi1`` transferring ``c`` to ``e`` to ``d``."""
    ops = tuple(ops)
    out = set()
    for p, op in enumerate(ops):
        if not isinstance(op, Inc):
            continue
        left = transfer_pairs(ops[:p], counters)
        right = transfer_pairs(ops[p + 1:], counters)
        out.update((c, d) for c, e in left if e == op.c for e2, d in right if e2 == op.c)
    return frozenset(out)


def prefix_pairs(blocks: Sequence[Sequence], counters: Sequence[str]) -> frozenset:
    """Pairs transferred by the flattening of some block prefix (the empty one included)."""
    out = set()
    flat: List = []
    out.update(transfer_pairs((), counters))
    for b in blocks:
        flat.extend(b)
        out.update(transfer_pairs(flat, counters))
    return frozenset(out)


def simulate_transfer(ops: Sequence, counters: Sequence[str], c: str, d: str, trials: int = 20, seed: int = 0) -> bool:
    """Semantic check: ``nu pi (d) >= nu(c)`` on random valuations (necessary for transfer)."""
    import random

    from .automata import apply_ops

    rng = random.Random(seed)
    for _ in range(trials):
        v = {x: rng.randint(0, 9) for x in counters}
        if apply_ops(v, ops)[d] < v[c]:
            return False
    return True


def words_up_to(alphabet: Sequence, max_len: int):
    for n in range(max_len + 1):
        yield from product(alphabet, repeat=n)


def classes_of_short_words(A: MaxAutomaton, max_len: int) -> Dict[tuple, List[tuple]]:
    groups: Dict[tuple, List[tuple]] = {}
    for w in words_up_to(A.alphabet, max_len):
        groups.setdefault(word_class(A, w).key, []).append(w)
    return groups


def factor_swap_agrees(A: MaxAutomaton, factors: Sequence[tuple], swapped: Sequence[tuple], split: int) -> Tuple[bool, bool]:
    """Acceptance of ``x_0..x_{split-1} (x_split..x_m)^omega`` and of the swapped factors."""
    def lasso(fs):
        prefix = tuple(a for f in fs[:split] for a in f)
        loop = tuple(a for f in fs[split:] for a in f)
        return LassoWord(prefix, loop)
    return accepts_lasso(A, lasso(factors)), accepts_lasso(A, lasso(swapped))
