"""Solving the delay-free game: exact min-parity solving and a threshold semi-decision.

Both modes play on the arena extended with a memory component: the base
automaton's state after reading the representatives of the classes seen so
far.  Leaving a Player-I vertex ``(r, (q, S))`` feeds ``rep(S)`` to the base
automaton.
"""
from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .automata import Bounded, Const, Formula, Inc, MaxAutomaton, Not, StructureError, min_parity_formula, equivalent
from .equivalence import CapacityError
from .graphs import on_cycle, reachable
from .reduction import I_VERTEX, O_VERTEX, GameArena

log = logging.getLogger(__name__)


class Verdict(str, enum.Enum):
    O_WINS = "O_WINS"
    I_WINS = "I_WINS"
    UNKNOWN = "UNKNOWN"


EXIT_CODES = {Verdict.O_WINS: 0, Verdict.I_WINS: 1, Verdict.UNKNOWN: 2}


# --------------------------------------------------------------------------
# parity declarations


@dataclass(frozen=True)
class ParityDeclaration:
    colors: Mapping[str, int]

    @classmethod
    def parse(cls, text: str) -> "ParityDeclaration":
        """Lines ``<counter> <color>``; blank lines and ``#`` lines are ignored."""
        colors = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise ValueError(f"line {lineno}: expected '<counter> <color>', got {line!r}")
            colors[parts[0]] = int(parts[1])
        return cls(colors)

    def dumps(self) -> str:
        return "".join(f"{c} {col}\n" for c, col in self.colors.items())


def increment_only(A: MaxAutomaton, counters) -> bool:
    counters = set(counters)
    for ops in A.labels.values():
        for op in ops:
            if op.c in counters and not isinstance(op, Inc):
                return False
    return True


def validate_parity_fragment(A: MaxAutomaton, decl: ParityDeclaration) -> bool:
    declared = set(decl.colors)
    if not declared <= set(A.counters):
        raise StructureError(f"declaration names unknown counters {sorted(declared - set(A.counters))}")
    stray = A.acceptance.atoms() - declared
    if stray:
        raise StructureError(f"acceptance uses undeclared counters {sorted(stray)}")
    if not increment_only(A, declared):
        return False
    return equivalent(A.acceptance, min_parity_formula(decl.colors), sorted(declared))


# --------------------------------------------------------------------------
# condition automaton


@dataclass(frozen=True)
class BlockSummary:
    end: int
    ops: tuple
    incremented: frozenset


class ConditionAutomaton:
    """Effect of reading ``rep(S)`` from every base state, per tracker class ``S``."""

    def __init__(self, arena: GameArena):
        self.arena = arena
        self.P = arena.P
        self.A = arena.P.A
        self._cache: Dict[Tuple[int, int], BlockSummary] = {}

    def summary(self, cls: int, q: int) -> BlockSummary:
        key = (cls, q)
        hit = self._cache.get(key)
        if hit is None:
            A = self.A
            ops = []
            for a in self.P.tracker.rep(cls):
                ai = A.letter_index[a]
                ops.extend(A.label_table[q][ai])
                q = A.delta_table[q][ai]
            hit = BlockSummary(q, tuple(ops), frozenset(op.c for op in ops if isinstance(op, Inc)))
            self._cache[key] = hit
        return hit

    def replay(self, classes: Sequence[int]) -> Tuple[int, tuple]:
        """Base state and flattened ops after reading ``rep(S_0) rep(S_1) ...``."""
        q = self.A.state_index[self.A.initial]
        ops: List = []
        for s in classes:
            b = self.summary(s, q)
            q = b.end
            ops.extend(b.ops)
        return q, tuple(ops)


# --------------------------------------------------------------------------
# game graphs


@dataclass
class GameGraph:
    """Arena x base-state memory.  ``nodes[i] = (arena_vertex, memory)``; owner 0 = O, 1 = I."""

    nodes: List[Tuple[int, int]] = field(default_factory=list)
    owner: List[int] = field(default_factory=list)
    priority: List[int] = field(default_factory=list)
    succ: List[List[int]] = field(default_factory=list)
    index: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def pred(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in self.nodes]
        for v, ws in enumerate(self.succ):
            for w in ws:
                out[w].append(v)
        return out


def build_parity_game(arena: GameArena, cond: ConditionAutomaton, decl: ParityDeclaration,
                      max_nodes: int = 10**6) -> GameGraph:
    A = cond.A
    colors = decl.colors
    top = max(colors.values(), default=0)
    all_bounded = A.acceptance.evaluate({c: True for c in A.counters})
    neutral = 2 * top + 2 if all_bounded else 2 * top + 3
    g = GameGraph()

    def node(v, mem):
        key = (v, mem)
        i = g.index.get(key)
        if i is None:
            i = len(g.nodes)
            if i >= max_nodes:
                raise CapacityError("parity game nodes", i + 1, max_nodes)
            g.index[key] = i
            g.nodes.append(key)
            g.owner.append(0 if arena.kind[v] == O_VERTEX else 1)
            prio = neutral
            if arena.kind[v] == I_VERTEX:
                seen = [colors[c] for c in cond.summary(arena.q_of(v)[1], mem).incremented if c in colors]
                if seen:
                    prio = min(seen)
            g.priority.append(prio)
            g.succ.append([])
            queue.append(i)
        return i

    queue: deque = deque()
    node(arena.initial, A.state_index[A.initial])
    while queue:
        i = queue.popleft()
        v, mem = g.nodes[i]
        nxt = mem
        if arena.kind[v] == I_VERTEX:
            nxt = cond.summary(arena.q_of(v)[1], mem).end
        g.succ[i] = [node(w, nxt) for w in arena.succ[v]]
    return g


# --------------------------------------------------------------------------
# recursive (Zielonka) min-parity solver


def attractor(g: GameGraph, nodes: Set[int], target: Set[int], player: int, pred) -> Tuple[Set[int], Dict[int, int]]:
    """Nodes in ``nodes`` from which ``player`` forces a visit to ``target``; with the forcing moves."""
    attr = set(target)
    strategy: Dict[int, int] = {}
    remaining = {v: sum(1 for w in g.succ[v] if w in nodes) for v in nodes if g.owner[v] != player}
    queue = deque(attr)
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if v not in nodes or v in attr:
                continue
            if g.owner[v] == player:
                attr.add(v)
                strategy[v] = w
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strategy


def zielonka(g: GameGraph, nodes: Optional[Set[int]] = None, pred=None):
    """Return ``(regions, strategies)``; ``regions[p]`` is won by player ``p`` (0 = even)."""
    if pred is None:
        pred = g.pred()
    if nodes is None:
        nodes = set(range(len(g.nodes)))
    if not nodes:
        return (set(), set()), ({}, {})
    p = min(g.priority[v] for v in nodes)
    i, j = p % 2, 1 - p % 2
    top = {v for v in nodes if g.priority[v] == p}
    attr_i, attr_strat = attractor(g, nodes, top, i, pred)
    sub_regions, sub_strats = zielonka(g, nodes - attr_i, pred)
    if not sub_regions[j]:
        strat_i = dict(sub_strats[i])
        strat_i.update(attr_strat)
        for v in top:
            if g.owner[v] == i:
                strat_i[v] = next(w for w in g.succ[v] if w in nodes)
        regions = [set(), set()]
        regions[i] = set(nodes)
        strats = [{}, {}]
        strats[i] = strat_i
        return tuple(regions), tuple(strats)
    attr_j, attr_j_strat = attractor(g, nodes, sub_regions[j], j, pred)
    rest_regions, rest_strats = zielonka(g, nodes - attr_j, pred)
    regions = [set(), set()]
    strats = [{}, {}]
    regions[i] = rest_regions[i]
    strats[i] = dict(rest_strats[i])
    regions[j] = rest_regions[j] | attr_j
    strat_j = dict(rest_strats[j])
    strat_j.update({v: w for v, w in sub_strats[j].items() if v in sub_regions[j]})
    strat_j.update(attr_j_strat)
    strats[j] = strat_j
    return tuple(regions), tuple(strats)


# --------------------------------------------------------------------------
# results and strategies


@dataclass
class FiniteMemoryStrategy:
    """Positional strategy on (arena vertex, base-state memory) for ``winner`` (0 = O, 1 = I)."""

    winner: int
    game: GameGraph
    choice: Dict[int, int]
    region: Set[int]

    def choose(self, vertex: int, memory: int) -> int:
        """Arena vertex to move to from ``(vertex, memory)``."""
        i = self.game.index[vertex, memory]
        return self.game.nodes[self.choice[i]][0]

    def lines(self) -> List[str]:
        out = []
        for i in sorted(self.choice):
            (v, m), (w, _) = self.game.nodes[i], self.game.nodes[self.choice[i]]
            out.append(f"at {v} mem {m} choose {w}")
        return out

    def restricted_successors(self) -> List[List[int]]:
        g = self.game
        return [
            [self.choice[v]] if g.owner[v] == self.winner and v in self.choice else list(g.succ[v])
            for v in range(len(g.nodes))
        ]


def parse_strategy_lines(text: str) -> Dict[Tuple[int, int], int]:
    """Read ``at <v> [mem <m>] choose <w>`` lines into ``{(v, m): w}`` (``m`` defaults to 0)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] != "at":
                raise ValueError
            if len(parts) == 6 and parts[2] == "mem" and parts[4] == "choose":
                out[int(parts[1]), int(parts[3])] = int(parts[5])
            elif len(parts) == 4 and parts[2] == "choose":
                out[int(parts[1]), 0] = int(parts[3])
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'at <v> [mem <m>] choose <w>'") from None
    return out


@dataclass
class SolveResult:
    verdict: Verdict
    mode: str
    bound: Optional[int] = None
    strategy: Optional[FiniteMemoryStrategy] = None
    game: Optional[GameGraph] = None
    regions: Optional[Tuple[Set[int], Set[int]]] = None
    diagnostic: str = ""

    def as_dict(self) -> dict:
        d = {"verdict": self.verdict.value, "mode": self.mode}
        if self.bound is not None:
            d["bound"] = self.bound
        if self.game is not None:
            d["game_nodes"] = len(self.game.nodes)
        if self.diagnostic:
            d["diagnostic"] = self.diagnostic
        return d


def solve_exact_parity(arena: GameArena, A: MaxAutomaton, decl: ParityDeclaration) -> SolveResult:
    if arena.P.A is not A:
        if arena.P.A != A:
            raise ValueError("arena was built for a different automaton")
    if not validate_parity_fragment(A, decl):
        raise ValueError("automaton is not in the parity fragment for this declaration")
    cond = ConditionAutomaton(arena)
    g = build_parity_game(arena, cond, decl)
    regions, strats = zielonka(g)
    winner = 0 if 0 in regions[0] else 1
    region = regions[winner]
    strategy = FiniteMemoryStrategy(
        winner, g, {v: w for v, w in strats[winner].items() if v in region and g.owner[v] == winner}, region
    )
    verdict = Verdict.O_WINS if winner == 0 else Verdict.I_WINS
    return SolveResult(verdict, "EXACT_PARITY", strategy=strategy, game=g, regions=regions)


def extract_strategy(result: SolveResult) -> FiniteMemoryStrategy:
    if result.mode != "EXACT_PARITY" or result.verdict == Verdict.UNKNOWN or result.strategy is None:
        raise ValueError("strategies exist only for exact parity results with a verdict")
    s = result.strategy
    if not validate_strategy(s):
        raise AssertionError("extracted strategy failed cycle-parity validation")
    return s


def validate_strategy(s: FiniteMemoryStrategy) -> bool:
    """Every cycle reachable under the strategy has a minimal priority of the winner's parity."""
    g = s.game
    succ = s.restricted_successors()
    start = [0] if 0 in s.region else sorted(s.region)[:1]
    live = reachable(succ, start)
    if not live <= s.region:
        return False
    for v in live:
        if g.owner[v] == s.winner and v not in s.choice:
            return False
    bad = sorted({g.priority[v] for v in live if g.priority[v] % 2 != s.winner})
    for p in bad:
        keep = sorted(v for v in live if g.priority[v] >= p)
        pos = {v: i for i, v in enumerate(keep)}
        sub = [[pos[w] for w in succ[v] if w in pos] for v in keep]
        cyc = on_cycle(sub)
        if any(g.priority[keep[i]] == p for i in cyc):
            return False
    return True


# --------------------------------------------------------------------------
# threshold semi-decision


def _literals(f: Formula, out: Set[Tuple[str, bool]]):
    if isinstance(f, Bounded):
        out.add((f.c, True))
    elif isinstance(f, Not):
        out.add((f.arg.c, False))
    elif isinstance(f, Const):
        pass
    else:
        for a in f.args:
            _literals(a, out)


def solve_threshold(arena: GameArena, A: MaxAutomaton, bound: int, max_nodes: int = 10**6) -> SolveResult:
    """Sound one-sided test replacing boundedness by "never exceeds ``bound``".

    A positive formula over ``B(c)`` yields a safety game for Player O; a
    positive formula over ``!B(c)`` yields one for Player I.  Winning the
    safety game proves the verdict; losing it proves nothing.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    phi = A.acceptance.nnf()
    lits: Set[Tuple[str, bool]] = set()
    _literals(phi, lits)
    polarities = {pos for _, pos in lits}
    if not lits:
        verdict = Verdict.O_WINS if phi.evaluate({}) else Verdict.I_WINS
        return SolveResult(verdict, "THRESHOLD", bound, diagnostic="constant acceptance condition")
    if polarities == {True, False}:
        return SolveResult(Verdict.UNKNOWN, "THRESHOLD", bound,
                           diagnostic="acceptance mixes B(c) and !B(c) literals; threshold test not applicable")
    if polarities == {True}:
        safety_player, goal, verdict = 0, phi, Verdict.O_WINS
    else:
        safety_player, goal, verdict = 1, A.acceptance.nnf(negate=True), Verdict.I_WINS
    won = _safety_game(arena, A, goal, bound, safety_player, max_nodes)
    if won:
        return SolveResult(verdict, "THRESHOLD", bound)
    who = "O" if safety_player == 0 else "I"
    return SolveResult(Verdict.UNKNOWN, "THRESHOLD", bound,
                       diagnostic=f"Player {who} cannot keep the relevant counters <= {bound}")


def _safety_game(arena: GameArena, A: MaxAutomaton, goal: Formula, bound: int, player: int, max_nodes: int) -> bool:
    """Can ``player`` keep ``goal`` true, reading ``B(c)`` as "c never exceeded ``bound``"?"""
    cond = ConditionAutomaton(arena)
    counters = A.counters
    ci = A.counter_index
    cap = bound + 1
    watched = sorted(goal.atoms())
    compiled: Dict[Tuple[int, int], List[list]] = {}

    def blocks(cls, q):
        key = (cls, q)
        hit = compiled.get(key)
        if hit is None:
            hit = []
            for a in arena.P.tracker.rep(cls):
                ai = A.letter_index[a]
                hit.append([(type(op).__name__, ci[op.c], *[ci[x] for x in op.counters()[1:]])
                            for op in A.label_table[q][ai]])
                q = A.delta_table[q][ai]
            compiled[key] = hit
        return hit

    def advance(cls, q, vals, flags):
        vals = list(vals)
        flags = set(flags)
        for block in blocks(cls, q):
            for op in block:
                kind, c = op[0], op[1]
                if kind == "Inc":
                    vals[c] = min(vals[c] + 1, cap)
                elif kind == "Reset":
                    vals[c] = 0
                else:
                    vals[c] = max(vals[op[2]], vals[op[3]])
            for name in watched:
                if vals[ci[name]] >= cap:
                    flags.add(name)
        return tuple(vals), frozenset(flags)

    def is_bad(flags):
        return not goal.evaluate({c: c not in flags for c in counters})

    nodes: List[tuple] = []
    index: Dict[tuple, int] = {}
    succ: List[List[int]] = []
    owner: List[int] = []

    def node(key):
        i = index.get(key)
        if i is None:
            i = len(nodes)
            if i >= max_nodes:
                raise CapacityError("threshold game nodes", i + 1, max_nodes)
            index[key] = i
            nodes.append(key)
            succ.append([])
            owner.append(0 if arena.kind[key[0]] == O_VERTEX else 1)
            queue.append(i)
        return i

    queue: deque = deque()
    node((arena.initial, A.state_index[A.initial], (0,) * len(counters), frozenset()))
    while queue:
        i = queue.popleft()
        v, q, vals, flags = nodes[i]
        if is_bad(flags):
            continue
        if arena.kind[v] == I_VERTEX:
            cls = arena.q_of(v)[1]
            q2 = cond.summary(cls, q).end
            vals2, flags2 = advance(cls, q, vals, flags)
        else:
            q2, vals2, flags2 = q, vals, flags
        succ[i] = [node((w, q2, vals2, flags2)) for w in arena.succ[v]]
    bad = {i for i, key in enumerate(nodes) if is_bad(key[3])}
    g = GameGraph(nodes=nodes, owner=owner, priority=[0] * len(nodes), succ=succ, index=index)
    lost, _ = attractor(g, set(range(len(nodes))), bad, 1 - player, g.pred())
    return 0 not in lost
