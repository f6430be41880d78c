"""Property battery for witness languages of a product automaton."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .reduction import (
    MapSpaces,
    ProductAutomaton,
    compute_r,
    enumerate_R_for_domain,
    wit_is_infinite,
    witmap,
    witness_dfa,
)


@dataclass
class ItemResult:
    item: int
    name: str
    passed: bool = True
    checked: int = 0
    skipped: bool = False
    failures: List[str] = field(default_factory=list)

    def fail(self, msg: str):
        self.passed = False
        if len(self.failures) < 5:
            self.failures.append(msg)

    def as_dict(self):
        return {"item": self.item, "name": self.name, "passed": self.passed, "checked": self.checked,
                "skipped": self.skipped, "failures": self.failures}


def _domains(P: ProductAutomaton, spaces: MapSpaces, rng: random.Random, extra: int, limit: int = 40) -> List[frozenset]:
    """Domains met by the arena construction (breadth-first, at most ``limit``) plus random ones."""
    start = frozenset((P.initial,))
    domains = [start]
    seen = {start}
    i = 0
    while i < len(domains) and len(domains) < limit:
        for r in enumerate_R_for_domain(P, domains[i], spaces):
            for q in sorted(r.domain):
                D = r(q)
                if D not in seen and len(domains) < limit:
                    seen.add(D)
                    domains.append(D)
        i += 1
    states = P.reachable_states
    for _ in range(extra):
        domains.append(frozenset(rng.sample(states, rng.randint(1, min(3, len(states))))))
    return list(dict.fromkeys(domains))


def lemma4_battery(P: ProductAutomaton, seed: int = 0, words_disjoint: int = 200, words_complete: int = 100,
                   max_k: int = 20, extra_domains: int = 3, bound_max_n: Optional[int] = 3) -> Dict[int, ItemResult]:
    """Check the five witness-language properties on ``P``.

    Item 2 compares witness-automaton sizes with ``2^(n^2)`` for ``n`` the
    number of reachable product states; it is skipped when ``n`` exceeds
    ``bound_max_n`` (pass ``None`` to always check).
    """
    rng = random.Random(seed)
    spaces = MapSpaces(P)
    letters = P.in_alphabet
    n = len(P.reachable_states)
    res = {
        1: ItemResult(1, "values of functions in R are nonempty"),
        2: ItemResult(2, "witness automaton has at most 2^(n^2) states"),
        3: ItemResult(3, "witness languages are dense"),
        4: ItemResult(4, "witness languages are disjoint"),
        5: ItemResult(5, "long words witness some function in R"),
    }
    if bound_max_n is not None and n > bound_max_n:
        res[2].skipped = True
    for D in _domains(P, spaces, rng, extra_domains):
        space = spaces.get(D)
        bound = len(space)
        R = enumerate_R_for_domain(P, D, spaces)
        for r in R:
            res[1].checked += 1
            if any(not s for _, s in r.items()):
                res[1].fail(f"empty value in function over {sorted(D)}")
        if not res[2].skipped:
            res[2].checked += 1
            if bound > 2 ** (n * n):
                res[2].fail(f"{bound} states for n={n}")
        layers = space.layers(max_k + bound)
        for r in R:
            target = space.index[tuple(s for _, s in r.values)]
            for k in range(max_k + 1):
                res[3].checked += 1
                if not any(target in layers[L] for L in range(k, k + bound + 1)):
                    res[3].fail(f"no witness of length in [{k}, {k + bound}]")
        dfas = [witness_dfa(P, r, spaces) for r in R]
        for _ in range(words_disjoint):
            w = tuple(rng.choice(letters) for _ in range(rng.randint(0, 2 * bound + 4)))
            res[4].checked += 1
            direct = compute_r(P, D, w)
            if witmap(P, D, w, spaces) != direct:
                res[4].fail(f"map dynamics disagree with direct computation on {w}")
            owners = sum(dfa.accepts(w) for dfa in dfas)
            if owners > 1 or (owners == 1 and direct not in R):
                res[4].fail(f"{w} witnesses {owners} functions")
        for _ in range(words_complete):
            w = tuple(rng.choice(letters) for _ in range(rng.randint(bound, bound + 12)))
            res[5].checked += 1
            r = compute_r(P, D, w)
            dfa = witness_dfa(P, r, spaces)
            if not (dfa.accepts(w) and wit_is_infinite(dfa) and r in R):
                res[5].fail(f"{w} of length {len(w)} >= {bound} misses R")
    return res
