"""Reduction of delay games to a delay-free game over reachability functions.

Product states are pairs ``(q, s)`` of a base state index and a tracker class
index.  A reachability function ``r`` maps each product state of its domain to
the set of product states that some output completion of an input word can
reach from ``(q, [eps])``.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .automata import MaxAutomaton, StructureError, letter_str
from .equivalence import CapacityError, TrackerAutomaton, build_tracker
from .graphs import on_cycle, reachable

log = logging.getLogger(__name__)

PState = Tuple[int, int]
PSet = FrozenSet[PState]

DEFAULT_ARENA_CAP = 10**5
DEFAULT_MAP_CAP = 10**5


class ProductAutomaton:
    """The product of a paired-alphabet max-automaton with its class tracker."""

    def __init__(self, A: MaxAutomaton, tracker: Optional[TrackerAutomaton] = None, tracker_cap: int = 10**6):
        if not A.is_paired:
            raise StructureError("the product needs an alphabet of (input, output) pairs")
        full = {(a, b) for a in A.in_alphabet for b in A.out_alphabet}
        if set(A.alphabet) != full:
            raise StructureError("the paired alphabet must be the full product of input and output letters")
        self.A = A
        self.tracker = tracker if tracker is not None else build_tracker(A, tracker_cap)
        self.initial: PState = (A.state_index[A.initial], 0)
        li = A.letter_index
        # letter indices of (a, b) for each input letter a, outputs in declaration order
        self.completions = {a: tuple(li[a, b] for b in A.out_alphabet) for a in A.in_alphabet}
        self._pow_cache: Dict[Tuple[PSet, object], PSet] = {}

    @property
    def in_alphabet(self):
        return self.A.in_alphabet

    @property
    def out_alphabet(self):
        return self.A.out_alphabet

    def step(self, p: PState, ai: int) -> PState:
        q, s = p
        return (self.A.delta_table[q][ai], self.tracker.delta[s][ai])

    def step_letter(self, p: PState, letter) -> PState:
        return self.step(p, self.A.letter_index[letter])

    def label(self, p: PState, letter):
        return self.A.labels[self.A.states[p[0]], letter]

    def run(self, p: PState, word: Sequence) -> PState:
        for a in word:
            p = self.step_letter(p, a)
        return p

    @staticmethod
    def eps(q: int) -> PState:
        return (q, 0)

    @cached_property
    def reachable_states(self) -> List[PState]:
        seen = {self.initial: None}
        queue = deque([self.initial])
        n = len(self.A.alphabet)
        while queue:
            p = queue.popleft()
            for ai in range(n):
                t = self.step(p, ai)
                if t not in seen:
                    seen[t] = None
                    queue.append(t)
        return list(seen)

    @property
    def size(self) -> int:
        """``|Q| * index``: the number of product states."""
        return len(self.A.states) * len(self.tracker)

    def describe(self, p: PState) -> str:
        q, s = p
        rep = " ".join(letter_str(a) for a in self.tracker.rep(s)) or "eps"
        return f"({self.A.states[q]},[{rep}])"

    def delta_pow(self, pset: Iterable[PState], a) -> PSet:
        pset = frozenset(pset)
        key = (pset, a)
        hit = self._pow_cache.get(key)
        if hit is not None:
            return hit
        out = set()
        for ai in self.completions[a]:
            for p in pset:
                out.add(self.step(p, ai))
        result = frozenset(out)
        self._pow_cache[key] = result
        return result


def build_product(A: MaxAutomaton, tracker_cap: int = 10**6) -> ProductAutomaton:
    return ProductAutomaton(A, tracker_cap=tracker_cap)


def delta_pow(P: ProductAutomaton, pset, a) -> PSet:
    return P.delta_pow(pset, a)


# --------------------------------------------------------------------------
# reachability functions


@dataclass(frozen=True)
class RFunction:
    """Partial map from product states to product-state sets.

    Values depend only on the first component of the argument, so they are
    stored per base state in ``values`` (sorted by base state index).
    """

    domain: FrozenSet[PState]
    values: Tuple[Tuple[int, PSet], ...]

    @cached_property
    def _lookup(self) -> Dict[int, PSet]:
        return dict(self.values)

    def __call__(self, p: PState) -> PSet:
        if p not in self.domain:
            raise KeyError(p)
        return self._lookup[p[0]]

    def first_components(self) -> Tuple[int, ...]:
        return tuple(q for q, _ in self.values)

    def items(self):
        for p in sorted(self.domain):
            yield p, self(p)


def first_components(domain: Iterable[PState]) -> Tuple[int, ...]:
    return tuple(sorted({q for q, _ in domain}))


def compute_r(P: ProductAutomaton, domain: Iterable[PState], word: Sequence) -> RFunction:
    domain = frozenset(domain)
    if not domain:
        raise ValueError("domain must be nonempty")
    values = []
    for q in first_components(domain):
        s = frozenset((P.eps(q),))
        for a in word:
            s = P.delta_pow(s, a)
        values.append((q, s))
    return RFunction(domain, tuple(values))


class MapSpace:
    """Reachable part of the map dynamics for one set of first components.

    A map assigns each first component ``q`` the set of product states some
    completion can reach from ``(q, [eps])``; input letters act componentwise
    via ``delta_pow``.
    """

    def __init__(self, P: ProductAutomaton, firsts: Tuple[int, ...], cap: int = DEFAULT_MAP_CAP):
        self.P = P
        self.firsts = firsts
        self.letters = P.in_alphabet
        start = tuple(frozenset((P.eps(q),)) for q in firsts)
        self.maps: List[Tuple[PSet, ...]] = [start]
        self.index = {start: 0}
        self.delta: List[List[int]] = []
        queue = deque([0])
        while queue:
            i = queue.popleft()
            row = []
            for a in self.letters:
                m = tuple(P.delta_pow(s, a) for s in self.maps[i])
                j = self.index.get(m)
                if j is None:
                    j = len(self.maps)
                    if j >= cap:
                        raise CapacityError("witness-automaton states", j + 1, cap)
                    self.index[m] = j
                    self.maps.append(m)
                    queue.append(j)
                row.append(j)
            self.delta.append(row)
        self.letter_pos = {a: i for i, a in enumerate(self.letters)}

    def __len__(self):
        return len(self.maps)

    def run(self, word: Sequence) -> int:
        i = 0
        for a in word:
            i = self.delta[i][self.letter_pos[a]]
        return i

    @cached_property
    def infinite(self) -> frozenset:
        """Map indices reached by infinitely many words (reachable from a cycle)."""
        return frozenset(reachable(self.delta, on_cycle(self.delta)))

    def as_function(self, domain: FrozenSet[PState], i: int) -> RFunction:
        return RFunction(domain, tuple(zip(self.firsts, self.maps[i])))

    def layers(self, max_len: int) -> List[frozenset]:
        """``layers[L]`` = map indices reached by words of length exactly ``L``."""
        out = [frozenset((0,))]
        for _ in range(max_len):
            out.append(frozenset(j for i in out[-1] for j in self.delta[i]))
        return out


@dataclass
class WitnessDFA:
    """DFA for the witness language of ``target``; ``accepting`` is ``None`` if unreachable."""

    space: MapSpace
    target: RFunction
    accepting: Optional[int]

    @property
    def num_states(self) -> int:
        return len(self.space)

    def accepts(self, word: Sequence) -> bool:
        return self.accepting is not None and self.space.run(word) == self.accepting


class MapSpaces:
    """Memo table of map spaces keyed by first components."""

    def __init__(self, P: ProductAutomaton, cap: int = DEFAULT_MAP_CAP):
        self.P = P
        self.cap = cap
        self._spaces: Dict[Tuple[int, ...], MapSpace] = {}

    def get(self, domain: Iterable[PState]) -> MapSpace:
        firsts = first_components(domain)
        space = self._spaces.get(firsts)
        if space is None:
            space = MapSpace(self.P, firsts, self.cap)
            self._spaces[firsts] = space
        return space

    def __iter__(self):
        return iter(self._spaces.values())

    def max_size(self) -> int:
        return max((len(s) for s in self._spaces.values()), default=0)


def witness_dfa(P: ProductAutomaton, r: RFunction, spaces: Optional[MapSpaces] = None) -> WitnessDFA:
    space = (spaces or MapSpaces(P)).get(r.domain)
    if space.firsts != r.first_components():
        raise ValueError("RFunction values do not match its domain")
    target = tuple(s for _, s in r.values)
    return WitnessDFA(space, r, space.index.get(target))


def wit_is_infinite(d: WitnessDFA) -> bool:
    return d.accepting is not None and d.accepting in d.space.infinite


def enumerate_R_for_domain(P: ProductAutomaton, domain: Iterable[PState], spaces: Optional[MapSpaces] = None) -> List[RFunction]:
    """All ``r`` with the given domain and an infinite witness language."""
    domain = frozenset(domain)
    if not domain:
        raise ValueError("domain must be nonempty")
    space = (spaces or MapSpaces(P)).get(domain)
    return [space.as_function(domain, i) for i in sorted(space.infinite)]


def witmap(P: ProductAutomaton, domain: Iterable[PState], word: Sequence, spaces: Optional[MapSpaces] = None) -> RFunction:
    """The unique ``r`` with the given domain whose witness language contains ``word``."""
    domain = frozenset(domain)
    space = (spaces or MapSpaces(P)).get(domain)
    return space.as_function(domain, space.run(word))


# --------------------------------------------------------------------------
# the arena


INIT, O_VERTEX, I_VERTEX = "init", "r", "rq"


@dataclass
class GameArena:
    """Explicit arena: ``v_I``, Player-O vertices ``r`` and Player-I vertices ``(r, q)``.

    ``payload[v]`` is ``None`` for ``v_I``, an :class:`RFunction` for O-vertices and
    ``(r_vertex_id, q)`` for I-vertices.
    """

    P: ProductAutomaton
    spaces: MapSpaces
    kind: List[str] = field(default_factory=list)
    payload: List[object] = field(default_factory=list)
    succ: List[List[int]] = field(default_factory=list)
    r_ids: Dict[RFunction, int] = field(default_factory=dict)
    rq_ids: Dict[Tuple[int, PState], int] = field(default_factory=dict)
    domain_R: Dict[FrozenSet[PState], List[int]] = field(default_factory=dict)

    initial = 0

    def __len__(self):
        return len(self.kind)

    def owner(self, v: int) -> str:
        return "O" if self.kind[v] == O_VERTEX else "I"

    def edges(self):
        for v, ws in enumerate(self.succ):
            for w in ws:
                yield v, w

    def r_of(self, v: int) -> RFunction:
        if self.kind[v] == O_VERTEX:
            return self.payload[v]
        if self.kind[v] == I_VERTEX:
            return self.payload[self.payload[v][0]]
        raise ValueError("v_I carries no function")

    def q_of(self, v: int) -> PState:
        return self.payload[v][1]

    def describe(self, v: int) -> str:
        kind = self.kind[v]
        if kind == INIT:
            return "init"
        if kind == O_VERTEX:
            r = self.payload[v]
            body = ",".join(
                f"{self.P.A.states[q]}->{{{' '.join(sorted(self.P.describe(p) for p in s))}}}"
                for q, s in r.values
            )
            return f"r[{body}]"
        rv, q = self.payload[v]
        return f"rq[{rv},{self.P.describe(q)}]"

    def block_length(self) -> int:
        """Largest witness-automaton size over the domains met during construction."""
        return self.spaces.max_size()

    def stats(self) -> Dict[str, object]:
        return {
            "vertices": len(self),
            "edges": sum(len(s) for s in self.succ),
            "O_vertices": sum(k == O_VERTEX for k in self.kind),
            "I_vertices": sum(k != O_VERTEX for k in self.kind),
            "domains": len(self.domain_R),
            "R_sizes": sorted(len(v) for v in self.domain_R.values()),
            "tracker_classes": len(self.P.tracker),
            "product_reachable": len(self.P.reachable_states),
            "max_witness_states": self.block_length(),
        }

    def dumps(self) -> str:
        lines = [f"vertex {v} {self.owner(v)} {self.describe(v)}" for v in range(len(self))]
        lines += [f"edge {v} {w}" for v, w in self.edges()]
        return "\n".join(lines) + "\n"


def build_arena(P: ProductAutomaton, max_vertices: int = DEFAULT_ARENA_CAP, max_maps: int = DEFAULT_MAP_CAP) -> GameArena:
    arena = GameArena(P, MapSpaces(P, max_maps))

    def add(kind, payload):
        if len(arena.kind) >= max_vertices:
            raise CapacityError(
                f"arena vertices (partial: {len(arena.r_ids)} O, {len(arena.rq_ids)} I)",
                len(arena.kind) + 1,
                max_vertices,
            )
        arena.kind.append(kind)
        arena.payload.append(payload)
        arena.succ.append([])
        return len(arena.kind) - 1

    pending: deque = deque()

    def r_vertices(domain):
        ids = arena.domain_R.get(domain)
        if ids is None:
            ids = []
            for r in enumerate_R_for_domain(P, domain, arena.spaces):
                v = arena.r_ids.get(r)
                if v is None:
                    v = add(O_VERTEX, r)
                    arena.r_ids[r] = v
                    pending.append(v)
                ids.append(v)
            arena.domain_R[domain] = ids
        return ids

    add(INIT, None)
    arena.succ[0] = list(r_vertices(frozenset((P.initial,))))
    while pending:
        rv = pending.popleft()
        r = arena.payload[rv]
        for q in sorted(r.domain):
            iv = add(I_VERTEX, (rv, q))
            arena.rq_ids[rv, q] = iv
            arena.succ[rv].append(iv)
            arena.succ[iv] = list(r_vertices(r(q)))
    log.debug("arena built: %s", arena.stats())
    return arena
