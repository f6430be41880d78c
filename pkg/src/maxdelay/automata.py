"""Max-automata: counter operations, acceptance formulas, runs and lasso acceptance.

A max-automaton is a complete DFA whose transitions carry sequences of counter
operations (``inc c``, ``reset c``, ``c := max(c0, c1)``).  A run is accepting
when the acceptance formula holds under the assignment mapping every counter to
``True`` iff its value stays bounded along the run.

Acceptance is decided here for ultimately periodic words ``u v^omega``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

Letter = Hashable
State = Hashable


class StructureError(ValueError):
    """Raised when an automaton, op or word refers to undeclared items."""


# --------------------------------------------------------------------------
# counter operations


@dataclass(frozen=True)
class Inc:
    c: str

    def counters(self):
        return (self.c,)

    def __str__(self):
        return f"inc {self.c}"


@dataclass(frozen=True)
class Reset:
    c: str

    def counters(self):
        return (self.c,)

    def __str__(self):
        return f"reset {self.c}"


@dataclass(frozen=True)
class Max:
    """``c := max(c0, c1)``."""

    c: str
    c0: str
    c1: str

    def counters(self):
        return (self.c, self.c0, self.c1)

    def __str__(self):
        return f"max {self.c} {self.c0} {self.c1}"


CounterOp = (Inc, Reset, Max)


def apply_ops(valuation: Mapping[str, int], ops: Iterable) -> Dict[str, int]:
    """Apply ``ops`` left to right to a copy of ``valuation``."""
    v = dict(valuation)
    for op in ops:
        for c in op.counters():
            if c not in v:
                raise StructureError(f"undeclared counter {c!r} in {op}")
        if isinstance(op, Inc):
            v[op.c] += 1
        elif isinstance(op, Reset):
            v[op.c] = 0
        elif isinstance(op, Max):
            v[op.c] = max(v[op.c0], v[op.c1])
        else:
            raise StructureError(f"not a counter operation: {op!r}")
    return v


# --------------------------------------------------------------------------
# acceptance formulas


class Formula:
    def evaluate(self, bounded: Mapping[str, bool]) -> bool:
        raise NotImplementedError

    def atoms(self) -> frozenset:
        raise NotImplementedError

    def nnf(self, negate: bool = False) -> "Formula":
        raise NotImplementedError

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def evaluate(self, bounded):
        return self.value

    def atoms(self):
        return frozenset()

    def nnf(self, negate=False):
        return Const(self.value != negate)

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Bounded(Formula):
    c: str

    def evaluate(self, bounded):
        return bool(bounded[self.c])

    def atoms(self):
        return frozenset((self.c,))

    def nnf(self, negate=False):
        return Not(self) if negate else self

    def __str__(self):
        return f"B({self.c})"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def evaluate(self, bounded):
        return not self.arg.evaluate(bounded)

    def atoms(self):
        return self.arg.atoms()

    def nnf(self, negate=False):
        return self.arg.nnf(not negate)

    def __str__(self):
        if isinstance(self.arg, (Bounded, Const)):
            return f"!{self.arg}"
        return f"!({self.arg})"


@dataclass(frozen=True)
class And(Formula):
    args: Tuple[Formula, ...]

    def evaluate(self, bounded):
        return all(a.evaluate(bounded) for a in self.args)

    def atoms(self):
        return frozenset().union(*(a.atoms() for a in self.args))

    def nnf(self, negate=False):
        parts = tuple(a.nnf(negate) for a in self.args)
        return Or(parts) if negate else And(parts)

    def __str__(self):
        if not self.args:
            return "true"
        return " & ".join(_wrap(a, And) for a in self.args)


@dataclass(frozen=True)
class Or(Formula):
    args: Tuple[Formula, ...]

    def evaluate(self, bounded):
        return any(a.evaluate(bounded) for a in self.args)

    def atoms(self):
        return frozenset().union(*(a.atoms() for a in self.args))

    def nnf(self, negate=False):
        parts = tuple(a.nnf(negate) for a in self.args)
        return And(parts) if negate else Or(parts)

    def __str__(self):
        if not self.args:
            return "false"
        return " | ".join(_wrap(a, Or) for a in self.args)


def _wrap(f, parent):
    if isinstance(f, (And, Or)) and not isinstance(f, parent) and len(f.args) > 1:
        return f"({f})"
    return str(f)


def truth_table(phi: Formula, counters: Sequence[str]):
    """Yield ``(assignment, value)`` for every boolean assignment of ``counters``."""
    for bits in itertools.product((False, True), repeat=len(counters)):
        assignment = dict(zip(counters, bits))
        yield assignment, phi.evaluate(assignment)


def equivalent(phi: Formula, psi: Formula, counters: Sequence[str]) -> bool:
    return all(phi.evaluate(a) == psi.evaluate(a) for a, _ in truth_table(phi, counters))


# --------------------------------------------------------------------------
# the automaton


def letter_str(a) -> str:
    if isinstance(a, tuple):
        return "|".join(str(x) for x in a)
    return str(a)


@dataclass(frozen=True)
class MaxAutomaton:
    """Deterministic, complete max-automaton.

    Letters are hashable; for game use they are pairs ``(in_letter, out_letter)``.
    ``delta`` and ``labels`` are keyed by ``(state, letter)``.
    """

    states: Tuple
    counters: Tuple[str, ...]
    alphabet: Tuple
    initial: State
    delta: Mapping
    labels: Mapping
    acceptance: Formula = field(default_factory=lambda: Const(True))

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "counters", tuple(self.counters))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if len(set(self.states)) != len(self.states):
            raise StructureError("duplicate states")
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise StructureError("alphabet must be nonempty without duplicates")
        if self.initial not in self.states:
            raise StructureError(f"initial state {self.initial!r} is not declared")
        declared = set(self.counters)
        state_set = set(self.states)
        missing = [(q, a) for q in self.states for a in self.alphabet if (q, a) not in self.delta]
        if missing:
            q, a = missing[0]
            raise StructureError(
                f"transition table incomplete: {len(missing)} missing, e.g. ({q}, {letter_str(a)})"
            )
        for key, target in self.delta.items():
            if key[0] not in state_set or key[1] not in self.alphabet or target not in state_set:
                raise StructureError(f"transition {key} -> {target} uses undeclared items")
        labels = {key: tuple(self.labels.get(key, ())) for key in self.delta}
        for key, ops in labels.items():
            for op in ops:
                if not isinstance(op, CounterOp):
                    raise StructureError(f"not a counter operation: {op!r}")
                bad = [c for c in op.counters() if c not in declared]
                if bad:
                    raise StructureError(f"label of {key} uses undeclared counter {bad[0]!r}")
        object.__setattr__(self, "labels", labels)
        bad = self.acceptance.atoms() - declared
        if bad:
            raise StructureError(f"acceptance uses undeclared counter(s) {sorted(bad)}")

    def __hash__(self):
        return hash((self.states, self.counters, self.alphabet, self.initial,
                     self.delta_table, self.label_table, self.acceptance))

    # dense encodings used by the profile machinery

    @cached_property
    def state_index(self) -> Dict:
        return {q: i for i, q in enumerate(self.states)}

    @cached_property
    def letter_index(self) -> Dict:
        return {a: i for i, a in enumerate(self.alphabet)}

    @cached_property
    def counter_index(self) -> Dict[str, int]:
        return {c: i for i, c in enumerate(self.counters)}

    @cached_property
    def delta_table(self) -> Tuple[Tuple[int, ...], ...]:
        si = self.state_index
        return tuple(
            tuple(si[self.delta[q, a]] for a in self.alphabet) for q in self.states
        )

    @cached_property
    def label_table(self) -> Tuple[Tuple[tuple, ...], ...]:
        return tuple(tuple(self.labels[q, a] for a in self.alphabet) for q in self.states)

    @property
    def is_paired(self) -> bool:
        return all(isinstance(a, tuple) and len(a) == 2 for a in self.alphabet)

    @cached_property
    def in_alphabet(self) -> Tuple:
        return tuple(dict.fromkeys(a[0] for a in self.alphabet))

    @cached_property
    def out_alphabet(self) -> Tuple:
        return tuple(dict.fromkeys(a[1] for a in self.alphabet))

    def zero(self) -> Dict[str, int]:
        return {c: 0 for c in self.counters}

    def step(self, q, a):
        try:
            return self.delta[q, a], self.labels[q, a]
        except KeyError:
            raise StructureError(f"letter {a!r} not in alphabet (or state {q!r} undeclared)") from None


class FiniteRun(NamedTuple):
    end: State
    ops: Tuple
    valuation: Dict[str, int]


def run_finite(A: MaxAutomaton, q, word: Sequence) -> FiniteRun:
    ops: List = []
    for a in word:
        q, label = A.step(q, a)
        ops.extend(label)
    return FiniteRun(q, tuple(ops), apply_ops(A.zero(), ops))


def label_word(A: MaxAutomaton, q, word: Sequence) -> Tuple[State, Tuple[tuple, ...]]:
    """End state and the sequence of transition labels (blocks) of the run from ``q``."""
    blocks = []
    for a in word:
        q, label = A.step(q, a)
        blocks.append(label)
    return q, tuple(blocks)


# --------------------------------------------------------------------------
# lasso words


@dataclass(frozen=True)
class LassoWord:
    prefix: Tuple
    loop: Tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise StructureError("lasso loop must be nonempty")

    def check(self, A: MaxAutomaton):
        letters = set(A.alphabet)
        for a in self.prefix + self.loop:
            if a not in letters:
                raise StructureError(f"letter {a!r} not in alphabet")
        return self


def _state_loop(A: MaxAutomaton, w: LassoWord):
    """Return ``(i, period)``: the state after ``u v^i`` recurs after ``period`` more loops."""
    q, _ = label_word(A, A.initial, w.prefix)
    seen = {q: 0}
    i = 0
    while True:
        q, _ = label_word(A, q, w.loop)
        i += 1
        if q in seen:
            return seen[q], i - seen[q]
        seen[q] = i


def unbounded_counters(A: MaxAutomaton, w: LassoWord) -> Dict[str, bool]:
    """Map each counter to whether it is unbounded on the run over ``u v^omega``."""
    from .equivalence import idempotent_power, profile_of_lambda_word

    w.check(A)
    start, period = _state_loop(A, w)
    q, _ = label_word(A, A.initial, w.prefix + w.loop * start)
    _, blocks = label_word(A, q, w.loop * period)
    e = idempotent_power(profile_of_lambda_word(blocks, A.counters))
    result = {}
    for ci, c in enumerate(A.counters):
        bit = 1 << ci
        result[c] = any(
            (e.transfer_inc[d] >> d) & 1 and e.prefix_transfer[d] & bit for d in range(len(A.counters))
        )
    return result


def accepts_lasso(A: MaxAutomaton, w: LassoWord) -> bool:
    """Decide whether ``A`` accepts ``u v^omega``.

    Counter ``c`` is unbounded iff, for the idempotent power ``e`` of the loop's
    profile, some ``d`` is carried to itself with an increment by ``e`` and some
    prefix of ``e`` carries ``d`` to ``c``.
    """
    unbounded = unbounded_counters(A, w)
    return A.acceptance.evaluate({c: not u for c, u in unbounded.items()})


# --------------------------------------------------------------------------
# brute-force oracle


def _compile(A: MaxAutomaton, ops):
    ci = A.counter_index
    out = []
    for op in ops:
        if isinstance(op, Inc):
            out.append((0, ci[op.c], 0, 0))
        elif isinstance(op, Reset):
            out.append((1, ci[op.c], 0, 0))
        else:
            out.append((2, ci[op.c], ci[op.c0], ci[op.c1]))
    return out


def _run_blocks(values, blocks):
    """Run compiled blocks in place; yield after each block (transition)."""
    for block in blocks:
        for kind, c, c0, c1 in block:
            if kind == 0:
                values[c] += 1
            elif kind == 1:
                values[c] = 0
            else:
                a, b = values[c0], values[c1]
                values[c] = a if a > b else b
        yield values


def oracle_parameters(A: MaxAutomaton, w: LassoWord) -> Tuple[int, int]:
    """Default ``(unroll, threshold)`` large enough for :func:`accepts_lasso_oracle`.

    With ``k`` counters, ``I`` increments per state-loop iteration and ``M0`` the
    largest counter value where the state loop starts, a bounded counter never
    exceeds ``M0 + (k + 1) * I``, while an unbounded one exceeds it within the
    last half of ``k * (threshold + 3) + 4k + 4`` state-loop iterations.
    """
    start, period = _state_loop(A, w)
    run = run_finite(A, A.initial, w.prefix + w.loop * start)
    m0 = max(run.valuation.values(), default=0)
    _, blocks = label_word(A, run.end, w.loop * period)
    incs = sum(isinstance(op, Inc) for b in blocks for op in b)
    k = len(A.counters)
    threshold = m0 + (k + 1) * incs
    iterations = k * (threshold + 3) + 4 * k + 4
    return start + period * iterations, max(threshold, 1)


def accepts_lasso_oracle(
    A: MaxAutomaton, w: LassoWord, unroll: Optional[int] = None, threshold: Optional[int] = None
) -> bool:
    """Brute-force acceptance: simulate ``u v^unroll`` with exact integers.

    Counter values are sampled after every transition.  A counter is declared
    unbounded iff it exceeds ``threshold`` during the last half of the
    simulated loop repetitions.  Valid when ``unroll`` and ``threshold`` are at
    least the defaults from :func:`oracle_parameters`.
    """
    w.check(A)
    default_unroll, default_threshold = oracle_parameters(A, w)
    unroll = default_unroll if unroll is None else unroll
    threshold = default_threshold if threshold is None else threshold
    if unroll <= 0 or threshold <= 0:
        raise ValueError("unroll and threshold must be positive")
    values = [0] * len(A.counters)
    q, blocks = label_word(A, A.initial, w.prefix)
    for _ in _run_blocks(values, [_compile(A, b) for b in blocks]):
        pass
    # compile the loop once per distinct starting state
    compiled = {}
    peak = [0] * len(A.counters)
    for rep in range(unroll):
        if q not in compiled:
            end, loop_blocks = label_word(A, q, w.loop)
            compiled[q] = (end, [_compile(A, b) for b in loop_blocks])
        q, cblocks = compiled[q]
        late = 2 * rep >= unroll
        for vals in _run_blocks(values, cblocks):
            if late:
                for i, x in enumerate(vals):
                    if x > peak[i]:
                        peak[i] = x
    bounded = {c: peak[i] <= threshold for i, c in enumerate(A.counters)}
    return A.acceptance.evaluate(bounded)


# --------------------------------------------------------------------------
# parity conditions


class ParityEncoding(NamedTuple):
    counters: Tuple[str, ...]
    labels: Dict
    acceptance: Formula
    color_of_counter: Dict[str, int]


def color_counter(color: int) -> str:
    return f"c{color}"


def min_parity_formula(color_of_counter: Mapping[str, int], min_even_wins: bool = True) -> Formula:
    """The smallest color whose counter is unbounded is even (odd if not ``min_even_wins``).

    Runs on which every color counter stays bounded are accepted.
    """
    winning = 0 if min_even_wins else 1
    by_color: Dict[int, List[str]] = {}
    for c, col in color_of_counter.items():
        by_color.setdefault(col, []).append(c)
    colors = sorted(by_color)
    disjuncts = []
    for i, col in enumerate(colors):
        if col % 2 != winning:
            continue
        smaller = [Bounded(c) for lower in colors[:i] for c in by_color[lower]]
        some_unbounded = [Not(Bounded(c)) for c in by_color[col]]
        head = some_unbounded[0] if len(some_unbounded) == 1 else Or(tuple(some_unbounded))
        disjuncts.append(And(tuple(smaller) + (head,)) if smaller else head)
    all_bounded = [Bounded(c) for col in colors for c in by_color[col]]
    if all_bounded:
        disjuncts.append(And(tuple(all_bounded)) if len(all_bounded) > 1 else all_bounded[0])
    if not disjuncts:
        return Const(True)
    return disjuncts[0] if len(disjuncts) == 1 else Or(tuple(disjuncts))


def parity_to_max(colors: Mapping, min_even_wins: bool = True) -> ParityEncoding:
    """Encode a coloring of states or edges as color counters.

    ``colors`` maps arbitrary keys (states or ``(state, letter)`` edges) to
    non-negative integers.  Each key's label is a single ``inc`` of its color's
    counter.
    """
    used = sorted(set(colors.values()))
    counters = tuple(color_counter(col) for col in used)
    labels = {key: (Inc(color_counter(col)),) for key, col in colors.items()}
    mapping = {color_counter(col): col for col in used}
    return ParityEncoding(counters, labels, min_parity_formula(mapping, min_even_wins), mapping)


def parity_automaton(states, alphabet, initial, delta, colors, min_even_wins=True) -> MaxAutomaton:
    """Build a max-automaton from a deterministic parity automaton.

    ``colors`` may color states (a transition is labelled with the color of its
    target) or edges ``(state, letter)``.
    """
    enc = parity_to_max(colors, min_even_wins)
    labels = {}
    for q in states:
        for a in alphabet:
            if (q, a) in colors:
                labels[q, a] = enc.labels[q, a]
            elif delta[q, a] in colors:
                labels[q, a] = enc.labels[delta[q, a]]
            else:
                labels[q, a] = ()
    return MaxAutomaton(states, enc.counters, alphabet, initial, delta, labels, enc.acceptance)
