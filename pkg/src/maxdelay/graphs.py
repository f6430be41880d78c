"""Small directed-graph helpers over integer nodes ``0..n-1``."""
from __future__ import annotations

from collections import deque
from typing import Iterable, List, Sequence, Set


def reachable(succ: Sequence[Iterable[int]], sources: Iterable[int]) -> Set[int]:
    seen = set(sources)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def sccs(succ: Sequence[Sequence[int]]) -> List[List[int]]:
    """Strongly connected components (iterative Tarjan)."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: List[int] = []
    out: List[List[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            edges = succ[v]
            if i < len(edges):
                work[-1] = (v, i + 1)
                w = edges[i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def on_cycle(succ: Sequence[Sequence[int]]) -> Set[int]:
    """Nodes lying on some cycle (nontrivial SCC or self-loop)."""
    result = set()
    for comp in sccs(succ):
        if len(comp) > 1 or comp[0] in succ[comp[0]]:
            result.update(comp)
    return result
