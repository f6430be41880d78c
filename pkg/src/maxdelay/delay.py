"""Delay games: the round protocol, built-in strategies and strategy transfer.

In round ``i`` Player I appends ``f(i)`` input letters, then Player O answers
one output letter.  Strategies are callables: Player I maps the output history
to the next input word, Player O maps the input history to one letter.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .automata import Bounded, Inc, Max, MaxAutomaton, Not, Reset, apply_ops, letter_str
from .reduction import GameArena, PState, ProductAutomaton, RFunction, witmap
from .solving import ConditionAutomaton, FiniteMemoryStrategy


class ProtocolError(RuntimeError):
    pass


class InternalConsistencyError(RuntimeError):
    """A completion that must exist was not found."""


# --------------------------------------------------------------------------
# delay functions


@dataclass(frozen=True)
class DelayFunction:
    """``f(i) = table[i]`` for ``i < len(table)``, else ``tail``."""

    table: Tuple[int, ...]
    tail: int = 1

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        if not self.table or any(x < 1 for x in self.table) or self.tail < 1:
            raise ValueError("delay function values must be >= 1")

    @classmethod
    def constant(cls, d: int) -> "DelayFunction":
        return cls((d,), 1)

    @classmethod
    def parse(cls, spec: str) -> "DelayFunction":
        """``const:d`` or ``table:f0,f1,...;tail=t``."""
        kind, _, body = spec.partition(":")
        try:
            if kind == "const":
                return cls.constant(int(body))
            if kind == "table":
                values, _, tail = body.partition(";")
                t = 1
                if tail:
                    key, _, val = tail.partition("=")
                    if key.strip() != "tail":
                        raise ValueError
                    t = int(val)
                return cls(tuple(int(x) for x in values.split(",")), t)
        except ValueError:
            pass
        raise ValueError(f"bad delay spec {spec!r}; use const:d or table:f0,f1,...;tail=t")

    def __call__(self, i: int) -> int:
        return self.table[i] if i < len(self.table) else self.tail

    @property
    def is_constant(self) -> bool:
        return all(x == 1 for x in self.table[1:]) and self.tail == 1

    def total(self, rounds: int) -> int:
        """Input letters available after ``rounds`` rounds."""
        head = sum(self.table[:rounds])
        return head + max(0, rounds - len(self.table)) * self.tail

    def round_of(self, n_letters: int) -> int:
        """Round in which Player O answers once ``n_letters`` input letters exist."""
        i = 0
        while self.total(i + 1) < n_letters:
            i += 1
        if self.total(i + 1) != n_letters:
            raise ProtocolError(f"{n_letters} input letters do not end a round of this delay function")
        return i

    def __str__(self):
        if self.is_constant:
            return f"const:{self.table[0]}"
        return "table:" + ",".join(map(str, self.table)) + f";tail={self.tail}"


# --------------------------------------------------------------------------
# plays


@dataclass
class PlayRecord:
    rounds: List[Tuple[Tuple, object]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    side_log: List[dict] = field(default_factory=list)

    @property
    def alpha(self) -> Tuple:
        return tuple(a for u, _ in self.rounds for a in u)

    @property
    def beta(self) -> Tuple:
        return tuple(v for _, v in self.rounds)

    @property
    def outcome(self) -> Tuple:
        return tuple(zip(self.alpha, self.beta))

    def dumps(self) -> str:
        lines = [f"round {i} | in={_join(u)} | out={letter_str(v)}" for i, (u, v) in enumerate(self.rounds)]
        lines.append("outcome=" + " ".join(letter_str(p) for p in self.outcome))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PlayRecord":
        rec = cls()
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("round "):
                _, ins, out = (part.strip() for part in line.split("|"))
                letters = ins[len("in="):]
                u = tuple(letters.split()) if " " in letters else tuple(letters)
                rec.rounds.append((u, out[len("out="):]))
        return rec


def _join(letters) -> str:
    letters = [letter_str(a) for a in letters]
    return ("" if all(len(a) == 1 for a in letters) else " ").join(letters)


def play(f: DelayFunction, player_i: Callable, player_o: Callable, rounds: int) -> PlayRecord:
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    rec = PlayRecord()
    intended = getattr(player_o, "intended_delay", None)
    if intended is not None and intended != f:
        rec.notes.append(f"Player O strategy was designed for {intended}, played under {f}: guarantees void")
    alpha: List = []
    beta: List = []
    for i in range(rounds):
        u = tuple(player_i(tuple(beta)))
        if len(u) != f(i):
            raise ProtocolError(f"round {i}: Player I supplied {len(u)} letters, delay function requires {f(i)}")
        alpha.extend(u)
        v = player_o(tuple(alpha))
        beta.append(v)
        rec.rounds.append((u, v))
    log = getattr(player_o, "side_log", None)
    if callable(log):
        rec.side_log = log(tuple(alpha))
    return rec


def outcome_states(A: MaxAutomaton, outcome: Sequence) -> List:
    """States visited by ``A`` on an outcome prefix (including the initial one)."""
    q = A.initial
    out = [q]
    for a in outcome:
        q = A.delta[q, a]
        out.append(q)
    return out


# --------------------------------------------------------------------------
# generic strategies


class ConstantPlayerO:
    def __init__(self, letter):
        self.letter = letter

    def __call__(self, alpha):
        return self.letter


class RandomPlayerO:
    """Seeded uniform choices; create one instance per play."""

    def __init__(self, letters: Sequence, seed: int):
        self.letters = tuple(letters)
        self.rng = random.Random(seed)

    def __call__(self, alpha):
        return self.rng.choice(self.letters)


class RandomPlayerI:
    """Seeded choices with per-letter weights; create one instance per play."""

    def __init__(self, f: DelayFunction, letters: Sequence, seed: int, weights: Optional[Sequence[float]] = None):
        self.f = f
        self.letters = tuple(letters)
        self.weights = weights
        self.rng = random.Random(seed)

    def __call__(self, beta):
        return tuple(self.rng.choices(self.letters, self.weights, k=self.f(len(beta))))


class ScriptedPlayerI:
    """Replays a fixed input word, cut into pieces of the required lengths."""

    def __init__(self, f: DelayFunction, word: Sequence, filler=None):
        self.f = f
        self.word = tuple(word)
        self.filler = filler

    def __call__(self, beta):
        start = self.f.total(len(beta))
        u = self.word[start:start + self.f(len(beta))]
        if len(u) < self.f(len(beta)):
            if self.filler is None:
                raise ProtocolError("script exhausted")
            u = u + (self.filler,) * (self.f(len(beta)) - len(u))
        return u


# --------------------------------------------------------------------------
# the block language that needs growing lookahead

BLOCK_IN = ("0", "1", "#")
BLOCK_OUT = ("0", "1", "*")


def section5_automaton() -> MaxAutomaton:
    """Max-automaton for the block language over {0,1,#} x {0,1,*}.

    Counters: ``i`` input-block length (reset at ``#``), ``h`` number of ``#``,
    ``t`` length of the output block in progress, ``o`` length of the last
    completed output block.  Accepts iff bounded input blocks, finitely many
    ``#``, or unbounded output blocks.
    """
    states = ("idle", "blk0", "blk1")
    alphabet = tuple((a, b) for a in BLOCK_IN for b in BLOCK_OUT)
    delta, labels = {}, {}
    for q in states:
        for a, b in alphabet:
            if a == "#":
                target = f"blk{b}" if b in "01" else "idle"
                ops = (Reset("t"), Reset("i"), Inc("h"))
            elif q == "idle":
                target, ops = "idle", (Inc("i"),)
            else:
                declared = q[-1]
                if b == "*":
                    target, ops = q, (Inc("i"), Inc("t"))
                elif a == declared and b == declared:
                    target, ops = "idle", (Inc("i"), Inc("t"), Max("o", "t", "t"), Reset("t"))
                else:
                    target, ops = "idle", (Inc("i"), Reset("t"))
            delta[q, (a, b)] = target
            labels[q, (a, b)] = ops
    phi = Bounded("i") | Bounded("h") | Not(Bounded("o"))
    return MaxAutomaton(states, ("i", "h", "t", "o"), alphabet, "idle", delta, labels, phi)


def input_blocks(alpha: Sequence, completed_only: bool = True) -> List[Tuple[int, int]]:
    """``(start, length)`` of maximal input blocks ``# w`` with ``w`` in {0,1}+.

    With ``completed_only`` a block counts only once the next ``#`` is visible.
    """
    out = []
    n = len(alpha)
    for s, a in enumerate(alpha):
        if a != "#":
            continue
        e = s + 1
        while e < n and alpha[e] in ("0", "1"):
            e += 1
        if e == s + 1:
            continue
        if completed_only and e >= n:
            continue
        out.append((s, e - s - 1))
    return out


def output_blocks(alpha: Sequence, beta: Sequence) -> List[Tuple[int, int]]:
    """``(start, length)`` of output blocks in the outcome prefix of length ``len(beta)``."""
    out = []
    n = min(len(alpha), len(beta))
    for s in range(n):
        if alpha[s] != "#" or beta[s] not in ("0", "1"):
            continue
        bit = beta[s]
        t = s + 1
        while t < n and beta[t] == "*" and alpha[t] in ("0", "1"):
            t += 1
        if t < n and alpha[t] == bit and beta[t] == bit:
            out.append((s, t - s))
    return out


class BlockAnswerPlayerO:
    """Wins the block language with two new input letters per round.

    At a round ``i`` with ``alpha(i) = #`` she finds the largest ``j <= 2i+1``
    such that ``alpha(i+1..j)`` is in {0,1}+, answers ``alpha(j)``, then ``*``
    until round ``j``, where she repeats ``alpha(j)``.  Otherwise she plays the
    first output letter.
    """

    def __init__(self, f: Optional[DelayFunction] = None, default: str = BLOCK_OUT[0]):
        self.intended_delay = DelayFunction((2,), 2)
        self.f = f or self.intended_delay
        self.default = default

    def __call__(self, alpha):
        t = self.f.round_of(len(alpha))
        i = t
        while i >= 0 and alpha[i] != "#":
            i -= 1
        if i < 0:
            return self.default
        visible = min(2 * i + 1, len(alpha) - 1)
        j = None
        p = i + 1
        while p <= visible and alpha[p] in ("0", "1"):
            j = p
            p += 1
        if j is None:
            return self.default
        if t == i or t == j:
            return alpha[j]
        if i < t < j:
            return "*"
        return self.default


def section5_strategy_O(f: Optional[DelayFunction] = None) -> BlockAnswerPlayerO:
    return BlockAnswerPlayerO(f)


class BlockGrowthPlayerI:
    """Beats every constant delay ``d`` with input blocks of lengths ``d, d+1, ...``.

    Each block opens with ``# 0^(d-1)``; once Player O has answered the ``#``
    the block continues with the letter opposite to her declared bit (``0`` if
    she answered ``1`` or ``*``) until it has the current length.
    """

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d
        self.f = DelayFunction.constant(d)
        self._reset()

    def _reset(self):
        self.alpha: List[str] = []
        self.beta: Tuple = ()
        self.block_start = 0
        self.length = self.d

    def _letter(self, pos: int) -> str:
        if pos > self.block_start + self.length:
            self.block_start = pos
            self.length += 1
        offset = pos - self.block_start
        if offset == 0:
            return "#"
        if offset < self.d:
            return "0"
        return "1" if self.beta[self.block_start] == "0" else "0"

    def __call__(self, beta):
        beta = tuple(beta)
        if beta[: len(self.beta)] != self.beta:
            self._reset()
        self.beta = beta
        need = self.f.total(len(beta) + 1)
        while len(self.alpha) < need:
            self.alpha.append(self._letter(len(self.alpha)))
        return tuple(self.alpha[self.f.total(len(beta)):need])


def section5_strategy_I(d: int) -> BlockGrowthPlayerI:
    return BlockGrowthPlayerI(d)


# --------------------------------------------------------------------------
# finite-horizon search


def horizon_search(A: MaxAutomaton, f: DelayFunction, horizon: int, bad_states) -> bool:
    """Can Player O avoid ``bad_states`` for ``horizon`` rounds of the delay game?"""
    bad_states = set(bad_states)
    ins, outs = A.in_alphabet, A.out_alphabet
    memo: Dict = {}

    def o_survives(i, q, pending):
        if q in bad_states:
            return False
        if i == horizon:
            return True
        key = (i, q, pending)
        if key in memo:
            return memo[key]
        result = True
        for u in itertools.product(ins, repeat=f(i)):
            look = pending + u
            if not any(o_survives(i + 1, A.delta[q, (look[0], b)], look[1:]) for b in outs):
                result = False
                break
        memo[key] = result
        return result

    return o_survives(0, A.initial, ())


def exhaustive_check(A: MaxAutomaton, f: DelayFunction, player_o: Callable, depth: int, bad_states):
    """Play ``player_o`` against every Player I behaviour for ``depth`` rounds.

    Returns ``(ok, counterexample_alpha)``.
    """
    bad_states = set(bad_states)
    ins = A.in_alphabet

    def rec(i, q, alpha):
        if i == depth:
            return None
        for u in itertools.product(ins, repeat=f(i)):
            a2 = alpha + u
            b = player_o(a2)
            q2 = A.delta[q, (a2[i], b)]
            if q2 in bad_states:
                return a2
            bad = rec(i + 1, q2, a2)
            if bad is not None:
                return bad
        return None

    cex = rec(0, A.initial, ())
    return cex is None, cex


# --------------------------------------------------------------------------
# strategy transfer from the delay-free game


def find_completion(P: ProductAutomaton, start: PState, inword: Sequence, target: PState) -> Tuple:
    """Lexicographically least output word leading ``P`` from ``start`` to ``target`` on ``inword``."""
    layers = [{start}]
    for a in inword:
        layers.append({P.step(p, ai) for p in layers[-1] for ai in P.completions[a]})
    if target not in layers[-1]:
        raise InternalConsistencyError(f"no completion reaches {P.describe(target)}")
    good = [set() for _ in layers]
    good[-1] = {target}
    for t in range(len(inword) - 1, -1, -1):
        good[t] = {p for p in layers[t] if any(P.step(p, ai) in good[t + 1] for ai in P.completions[inword[t]])}
    out = []
    p = start
    for t, a in enumerate(inword):
        for b, ai in zip(P.out_alphabet, P.completions[a]):
            nxt = P.step(p, ai)
            if nxt in good[t + 1]:
                out.append(b)
                p = nxt
                break
    return tuple(out)


def minimal_block_length(arena: GameArena, limit: int = 1000) -> int:
    """Least ``d`` such that every input word of length ``d`` lands in an infinite map, for every domain."""
    spaces = list(arena.spaces)
    for d in range(1, limit + 1):
        if all(space.layers(d)[d] <= space.infinite for space in spaces):
            return d
    raise ValueError("no block length found below the limit")


class TransferredStrategy:
    """Delay-game strategy for Player O under ``f(0) = 2d`` built from a game strategy.

    Input and output are cut into blocks of length ``d``.  Block ``a_i`` induces
    ``r_i = witmap_{r_{i-1}(q_{i-1})}(a_i)``; the game strategy picks ``q_i``
    and Player O plays an output block ``b_{i-1}`` that realises ``q_i``.
    """

    def __init__(self, arena: GameArena, game_strategy: FiniteMemoryStrategy, d: int):
        if game_strategy.winner != 0:
            raise ValueError("transfer needs a Player O strategy")
        self.arena = arena
        self.P = arena.P
        self.strategy = game_strategy
        self.d = d
        self.f = DelayFunction.constant(2 * d)
        self.intended_delay = self.f
        self.cond = ConditionAutomaton(arena)
        self._blocks: Dict[Tuple, Tuple] = {}

    def _simulate(self, alpha: Tuple, upto: int):
        """Game play prefix up to ``q_upto`` and output blocks ``b_0 .. b_{upto-1}``."""
        d, P, arena = self.d, self.P, self.arena
        A = P.A
        q_i = P.initial
        mem = A.state_index[A.initial]
        domain = frozenset((q_i,))
        log: List[dict] = []
        blocks: List[Tuple] = []
        prev = None
        for i in range(upto + 1):
            a_i = alpha[i * d:(i + 1) * d]
            r_i = witmap(P, domain, a_i, arena.spaces)
            rv = arena.r_ids.get(r_i)
            if rv is None:
                raise InternalConsistencyError(f"block {i}: induced function is not a game vertex")
            choice = self.strategy.choose(rv, mem)
            q_next = arena.q_of(choice)
            log.append({"round": i, "r": rv, "domain": sorted(domain), "q": q_next, "choice": choice, "memory": mem})
            if prev is not None:
                prev_q, prev_word = prev
                blocks.append(find_completion(P, P.eps(prev_q[0]), prev_word, q_next))
            prev = (q_next, a_i)
            domain = r_i(q_next)
            mem = self.cond.summary(q_next[1], mem).end
            q_i = q_next
        return log, blocks

    def __call__(self, alpha):
        alpha = tuple(alpha)
        t = len(alpha) - 2 * self.d
        if t < 0:
            raise ProtocolError("transferred strategy needs f(0) = 2d")
        k, offset = divmod(t, self.d)
        key = alpha[: (k + 2) * self.d]
        blk = self._blocks.get(key)
        if blk is None:
            _, blocks = self._simulate(key, k + 1)
            blk = blocks[k]
            self._blocks[key] = blk
        return blk[offset]

    def side_log(self, alpha) -> List[dict]:
        alpha = tuple(alpha)
        complete = len(alpha) // self.d - 1
        if complete < 0:
            return []
        log, _ = self._simulate(alpha[: (complete + 1) * self.d], complete)
        return log


def transfer_strategy_from_game(arena: GameArena, game_strategy: FiniteMemoryStrategy, d: Optional[int] = None) -> TransferredStrategy:
    need = minimal_block_length(arena)
    if d is None:
        d = need
    if d < need:
        raise ValueError(f"block length {d} too small; words of that length may miss every infinite witness set (need >= {need})")
    return TransferredStrategy(arena, game_strategy, d)


def audit_side_log(arena: GameArena, strategy: FiniteMemoryStrategy, log: List[dict]) -> List[str]:
    """Check constraints on a reconstructed game play; returns a list of problems."""
    problems = []
    P = arena.P
    prev = None
    for entry in log:
        r = arena.payload[entry["r"]]
        if entry["round"] == 0 and r.domain != frozenset((P.initial,)):
            problems.append("round 0: domain is not the initial product state")
        if prev is not None:
            pr, pq = prev
            if r.domain != pr(pq):
                problems.append(f"round {entry['round']}: domain differs from previous value")
            if entry["r"] not in arena.succ[arena.rq_ids[arena.r_ids[pr], pq]]:
                problems.append(f"round {entry['round']}: not an arena edge")
        if entry["q"] not in r.domain:
            problems.append(f"round {entry['round']}: chosen state outside the domain")
        if strategy.choose(entry["r"], entry["memory"]) != entry["choice"]:
            problems.append(f"round {entry['round']}: choice differs from the game strategy")
        prev = (r, entry["q"])
    return problems


# --------------------------------------------------------------------------
# game strategy from a delay strategy (the other direction)


def witness_word(arena: GameArena, r: RFunction, min_len: int) -> Tuple:
    """A witness of ``r`` with ``min_len <= |w| <= min_len + (map count)``, lexicographically least."""
    space = arena.spaces.get(r.domain)
    target = space.index[tuple(s for _, s in r.values)]
    horizon = min_len + len(space)
    layers = space.layers(horizon)
    length = next((L for L in range(min_len, horizon + 1) if target in layers[L]), None)
    if length is None:
        raise ValueError("no witness in the length window; is r an arena vertex?")
    good = [set() for _ in range(length + 1)]
    good[length] = {target}
    for t in range(length - 1, -1, -1):
        good[t] = {m for m in layers[t] if any(j in good[t + 1] for j in space.delta[m])}
    word, m = [], 0
    for t in range(length):
        for a, j in zip(space.letters, space.delta[m]):
            if j in good[t + 1]:
                word.append(a)
                m = j
                break
    return tuple(word)


class SimulatedGameStrategy:
    """Player O strategy in the delay-free game obtained by running a delay strategy.

    ``choose(prefix)`` takes the Player I choices ``[r_0, ..., r_i]`` (arena
    vertex ids) and returns the product state ``q_i``.
    """

    def __init__(self, arena: GameArena, player_o: Callable, f0: int):
        self.arena = arena
        self.player_o = player_o
        self.f0 = f0
        self.witness_lengths: List[int] = []

    def choose(self, r_vertices: Sequence[int]) -> PState:
        P = self.arena.P
        if len(r_vertices) == 1:
            return P.initial
        words = [witness_word(self.arena, self.arena.payload[v], self.f0) for v in r_vertices]
        self.witness_lengths = [len(w) for w in words]
        alpha = tuple(itertools.chain.from_iterable(words))
        beta = []
        # Player O has answered alpha up to position len(alpha) - f0
        for n in range(self.f0, len(alpha) + 1):
            beta.append(self.player_o(alpha[:n]))
        start = sum(len(w) for w in words[:-2])
        prev_q = self.choose(r_vertices[:-1])
        x = tuple(zip(alpha[start:start + len(words[-2])], beta[start:start + len(words[-2])]))
        return P.run(P.eps(prev_q[0]), x)


def interactive_play(A: MaxAutomaton, f: DelayFunction, player_o: Callable,
                     read=input, write=print, max_rounds: Optional[int] = None) -> PlayRecord:
    """Let a human play Player I; ``q`` quits.  Input letters are separated by spaces."""
    P = ProductAutomaton(A)
    rec = PlayRecord()
    alpha: List = []
    beta: List = []
    i = 0
    while max_rounds is None or i < max_rounds:
        need = f(i)
        try:
            line = read(f"round {i}: enter {need} input letter(s) from {' '.join(map(str, A.in_alphabet))} (q quits): ")
        except EOFError:
            break
        line = line.strip()
        if line == "q":
            break
        tokens = line.split() if " " in line else list(line)
        if len(tokens) != need or any(t not in A.in_alphabet for t in tokens):
            write(f"need exactly {need} letters from {' '.join(map(str, A.in_alphabet))}")
            continue
        alpha.extend(tokens)
        v = player_o(tuple(alpha))
        beta.append(v)
        rec.rounds.append((tuple(tokens), v))
        outcome = list(zip(alpha, beta))
        p = P.run(P.initial, outcome)
        ops = [op for q, a in zip(outcome_states(A, outcome), outcome) for op in A.labels[q, a]]
        vals = apply_ops(A.zero(), ops)
        write(f"  O answers {v}; outcome {' '.join(letter_str(x) for x in outcome)}")
        write(f"  product state {P.describe(p)}; counters " + " ".join(f"{c}={vals[c]}" for c in A.counters))
        i += 1
    return rec
