"""Op profiles, word classes and the class-tracking automaton.

Relations on counters are stored as tuples of row bitmasks: ``rel[c] >> d & 1``
says that ``(c, d)`` is in the relation.  Counters are identified by their
index in the owning automaton's counter tuple.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .automata import Inc, Max, MaxAutomaton, Reset, StructureError, label_word


class CapacityError(RuntimeError):
    def __init__(self, what: str, reached: int, cap: int):
        super().__init__(f"{what}: more than {cap} (reached {reached})")
        self.what = what
        self.reached = reached
        self.cap = cap


Relation = Tuple[int, ...]


def identity_rel(k: int) -> Relation:
    return tuple(1 << i for i in range(k))


def compose_rel(r: Relation, s: Relation) -> Relation:
    """``(c, d)`` such that ``(c, e)`` in ``r`` and ``(e, d)`` in ``s`` for some ``e``."""
    out = []
    for row in r:
        acc = 0
        e = 0
        while row:
            if row & 1:
                acc |= s[e]
            row >>= 1
            e += 1
        out.append(acc)
    return tuple(out)


def union_rel(r: Relation, s: Relation) -> Relation:
    return tuple(a | b for a, b in zip(r, s))


def rel_pairs(rel: Relation, counters: Sequence[str]) -> frozenset:
    return frozenset(
        (counters[c], counters[d])
        for c in range(len(counters))
        for d in range(len(counters))
        if rel[c] >> d & 1
    )


def rel_from_pairs(pairs, counters: Sequence[str]) -> Relation:
    idx = {c: i for i, c in enumerate(counters)}
    rows = [0] * len(counters)
    for c, d in pairs:
        rows[idx[c]] |= 1 << idx[d]
    return tuple(rows)


def rel_subset(r: Relation, s: Relation) -> bool:
    return all(a & ~b == 0 for a, b in zip(r, s))


@dataclass(frozen=True)
class OpProfile:
    """Transfer, transfer-with-increment and prefix-transfer relations of a Λ-word."""

    transfer: Relation
    transfer_inc: Relation
    prefix_transfer: Relation

    @property
    def k(self) -> int:
        return len(self.transfer)

    def pairs(self, counters):
        return (
            rel_pairs(self.transfer, counters),
            rel_pairs(self.transfer_inc, counters),
            rel_pairs(self.prefix_transfer, counters),
        )

    def __matmul__(self, other: "OpProfile") -> "OpProfile":
        return compose(self, other)


def identity_profile(k: int) -> OpProfile:
    ident = identity_rel(k)
    return OpProfile(ident, (0,) * k, ident)


def compose(p: OpProfile, q: OpProfile) -> OpProfile:
    """Profile of the concatenation of a word with profile ``p`` and one with profile ``q``."""
    if p.k != q.k:
        raise StructureError("profiles over different counter sets")
    transfer = compose_rel(p.transfer, q.transfer)
    transfer_inc = union_rel(
        compose_rel(p.transfer_inc, q.transfer), compose_rel(p.transfer, q.transfer_inc)
    )
    prefix = union_rel(p.prefix_transfer, compose_rel(p.transfer, q.prefix_transfer))
    return OpProfile(transfer, transfer_inc, prefix)


def _index(counters, c):
    try:
        return counters.index(c)
    except ValueError:
        raise StructureError(f"undeclared counter {c!r}") from None


def profile_of_op(op, counters: Sequence[str]) -> OpProfile:
    """Profile of a single operation viewed as a one-letter Λ-word."""
    counters = list(counters)
    k = len(counters)
    ident = identity_rel(k)
    inc = [0] * k
    if isinstance(op, Inc):
        transfer = ident
        c = _index(counters, op.c)
        inc[c] = 1 << c
    elif isinstance(op, Reset):
        c = _index(counters, op.c)
        transfer = tuple(0 if i == c else row for i, row in enumerate(ident))
    elif isinstance(op, Max):
        c = _index(counters, op.c)
        rows = [0 if i == c else row for i, row in enumerate(ident)]
        rows[_index(counters, op.c0)] |= 1 << c
        rows[_index(counters, op.c1)] |= 1 << c
        transfer = tuple(rows)
    else:
        raise StructureError(f"not a counter operation: {op!r}")
    return OpProfile(transfer, tuple(inc), union_rel(ident, transfer))


def profile_of_block(ops: Sequence, counters: Sequence[str]) -> OpProfile:
    """Profile of one transition label; its only Λ-prefixes are ε and itself."""
    k = len(counters)
    transfer = identity_rel(k)
    transfer_inc = (0,) * k
    for op in ops:
        p = profile_of_op(op, counters)
        transfer_inc = union_rel(
            compose_rel(transfer_inc, p.transfer), compose_rel(transfer, p.transfer_inc)
        )
        transfer = compose_rel(transfer, p.transfer)
    return OpProfile(transfer, transfer_inc, union_rel(identity_rel(k), transfer))


def profile_of_lambda_word(blocks: Sequence[Sequence], counters: Sequence[str]) -> OpProfile:
    p = identity_profile(len(counters))
    for block in blocks:
        p = compose(p, profile_of_block(block, counters))
    return p


def idempotent_power(p: OpProfile) -> OpProfile:
    """The unique idempotent among ``p, p^2, p^3, ...``.

    Powers are walked one at a time: repeated squaring never reaches the
    idempotent when the cyclic part has odd length.
    """
    x = p
    while True:
        if compose(x, x) == x:
            return x
        x = compose(x, p)


# --------------------------------------------------------------------------
# word classes


@dataclass(frozen=True)
class WordClass:
    """A class of words: the transition profile plus one op profile per state.

    ``representative`` is excluded from equality and hashing.
    """

    transition_profile: Tuple[int, ...]
    per_state_profile: Tuple[OpProfile, ...]
    representative: tuple = field(default=(), compare=False)

    @property
    def key(self):
        return (self.transition_profile, self.per_state_profile)


def empty_class(A: MaxAutomaton) -> WordClass:
    n = len(A.states)
    return WordClass(tuple(range(n)), (identity_profile(len(A.counters)),) * n, ())


def word_class(A: MaxAutomaton, word: Sequence) -> WordClass:
    word = tuple(word)
    trans = []
    profiles = []
    for q in A.states:
        end, blocks = label_word(A, q, word)
        trans.append(A.state_index[end])
        profiles.append(profile_of_lambda_word(blocks, A.counters))
    return WordClass(tuple(trans), tuple(profiles), word)


class _LetterSteps:
    """Per-(state, letter) block profiles, cached for successor computation."""

    def __init__(self, A: MaxAutomaton):
        self.A = A
        self.block = [
            [profile_of_block(ops, A.counters) for ops in row] for row in A.label_table
        ]

    def successor(self, cls: WordClass, ai: int) -> WordClass:
        dt = self.A.delta_table
        trans = tuple(dt[s][ai] for s in cls.transition_profile)
        profiles = tuple(
            compose(p, self.block[s][ai])
            for p, s in zip(cls.per_state_profile, cls.transition_profile)
        )
        return WordClass(trans, profiles, cls.representative + (self.A.alphabet[ai],))


class TrackerAutomaton:
    """DFA over the automaton's alphabet whose states are word classes.

    ``classes[i]`` carries the BFS-shortest (then lexicographically least in
    alphabet order) representative.  ``delta[i][a]`` is a class index.
    """

    def __init__(self, A: MaxAutomaton, classes: List[WordClass], delta: List[List[int]]):
        self.A = A
        self.classes = classes
        self.delta = delta
        self.index: Dict = {c.key: i for i, c in enumerate(classes)}
        self.initial = 0

    def __len__(self):
        return len(self.classes)

    def class_id(self, cls: WordClass) -> int:
        return self.index[cls.key]

    def run(self, word: Sequence) -> int:
        li = self.A.letter_index
        s = self.initial
        for a in word:
            s = self.delta[s][li[a]]
        return s

    def rep(self, i: int) -> tuple:
        return self.classes[i].representative

    def table(self) -> List[Tuple[int, object, int]]:
        return [
            (i, a, self.delta[i][ai])
            for i in range(len(self.classes))
            for ai, a in enumerate(self.A.alphabet)
        ]


def build_tracker(A: MaxAutomaton, state_cap: int = 10**6) -> TrackerAutomaton:
    steps = _LetterSteps(A)
    start = empty_class(A)
    classes = [start]
    index = {start.key: 0}
    delta: List[List[int]] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        row = []
        for ai in range(len(A.alphabet)):
            succ = steps.successor(classes[i], ai)
            j = index.get(succ.key)
            if j is None:
                j = len(classes)
                if j >= state_cap:
                    raise CapacityError("tracker classes", j + 1, state_cap)
                index[succ.key] = j
                classes.append(succ)
                queue.append(j)
            row.append(j)
        delta.append(row)
    return TrackerAutomaton(A, classes, delta)


def index_bounds(n: int, k: int) -> Dict[str, int]:
    """Upper bounds on the number of classes: ``2^(3k^2)`` op profiles, ``n^n * 2^(3k^2 n)`` word classes."""
    ops = 2 ** (3 * k * k)
    return {"ops": ops, "words": n**n * ops**n}
