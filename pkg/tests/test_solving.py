import dataclasses
import random

import pytest

from maxdelay.automata import StructureError, parity_automaton
from maxdelay.equivalence import CapacityError
from maxdelay.reduction import I_VERTEX, ProductAutomaton, build_arena
from maxdelay.solving import (
    EXIT_CODES,
    ConditionAutomaton,
    FiniteMemoryStrategy,
    GameGraph,
    ParityDeclaration,
    SolveResult,
    Verdict,
    extract_strategy,
    parse_strategy_lines,
    solve_exact_parity,
    solve_threshold,
    validate_parity_fragment,
    validate_strategy,
    zielonka,
)
from maxdelay.textformat import parse_formula

from conftest import DATA, example


def solved(name):
    A = example(name)
    arena = build_arena(ProductAutomaton(A))
    decl = ParityDeclaration.parse((DATA / f"{name}.parity").read_text())
    return A, arena, solve_exact_parity(arena, A, decl)


@pytest.fixture(scope="module")
def results():
    return {name: solved(name) for name in ("lookahead2", "unrevealed", "predict")}


def test_declaration_round_trip():
    d = ParityDeclaration.parse("# colors\nc1 1\n\nc2 2\n")
    assert d.colors == {"c1": 1, "c2": 2}
    assert ParityDeclaration.parse(d.dumps()) == d
    with pytest.raises(ValueError):
        ParityDeclaration.parse("c1 one\n")


def test_fragment_validation():
    A = example("lookahead2")
    assert validate_parity_fragment(A, ParityDeclaration({"z": 1}))
    assert not validate_parity_fragment(A, ParityDeclaration({"z": 2}))
    with pytest.raises(StructureError):
        validate_parity_fragment(A, ParityDeclaration({"nope": 1}))
    assert not validate_parity_fragment(example("section5"), ParityDeclaration({"i": 1, "h": 1, "t": 2, "o": 3}))


def test_verdicts(results):
    assert results["lookahead2"][2].verdict == Verdict.O_WINS
    assert results["unrevealed"][2].verdict == Verdict.I_WINS
    assert results["predict"][2].verdict == Verdict.O_WINS
    assert EXIT_CODES == {Verdict.O_WINS: 0, Verdict.I_WINS: 1, Verdict.UNKNOWN: 2}


def test_regions_partition(results):
    for _, _, res in results.values():
        w0, w1 = res.regions
        assert not (w0 & w1)
        assert w0 | w1 == set(range(len(res.game.nodes)))


def test_strategies_validate(results):
    for _, _, res in results.values():
        s = extract_strategy(res)
        assert validate_strategy(s)
        assert parse_strategy_lines("\n".join(s.lines())) == {
            (s.game.nodes[v][0], s.game.nodes[v][1]): s.game.nodes[w][0] for v, w in s.choice.items()
        }


def test_lookahead_strategy_avoids_sink(results):
    A, arena, res = results["lookahead2"]
    s = res.strategy
    bad = A.state_index["bad"]
    succ = s.restricted_successors()
    seen, stack = {0}, [0]
    while stack:
        v = stack.pop()
        vertex, _ = s.game.nodes[v]
        if arena.kind[vertex] == I_VERTEX:
            assert arena.q_of(vertex)[0] != bad
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)


def test_edge_priorities_match_simulation(results):
    rng = random.Random(0)
    A, arena, res = results["predict"]
    g = res.game
    colors = {"c1": 1, "c2": 2}
    for i in rng.sample(range(len(g.nodes)), 60):
        v, mem = g.nodes[i]
        if arena.kind[v] != I_VERTEX:
            continue
        q = A.states[mem]
        seen = []
        for a in arena.P.tracker.rep(arena.q_of(v)[1]):
            seen += [colors[op.c] for op in A.labels[q, a]]
            q = A.delta[q, a]
        assert g.priority[i] == (min(seen) if seen else 2 * 2 + 2)


def test_single_vertex_self_loop():
    g = GameGraph(nodes=[(0, 0)], owner=[0], priority=[2], succ=[[0]], index={(0, 0): 0})
    regions, strats = zielonka(g)
    assert regions == ({0}, set())
    s = FiniteMemoryStrategy(0, g, strats[0], regions[0])
    assert s.choice == {0: 0} and validate_strategy(s)
    g.priority[0] = 1
    regions, _ = zielonka(g)
    assert regions == (set(), {0})


def test_extract_rejects_threshold_results():
    with pytest.raises(ValueError):
        extract_strategy(SolveResult(Verdict.UNKNOWN, "THRESHOLD", 0))


def test_threshold_agrees_with_exact(results):
    A, arena, exact = results["lookahead2"]
    for b in range(3):
        res = solve_threshold(arena, A, b)
        assert res.verdict in (exact.verdict, Verdict.UNKNOWN)
    assert solve_threshold(arena, A, 0).verdict == Verdict.O_WINS
    A, arena, exact = results["unrevealed"]
    assert solve_threshold(arena, A, 1).verdict in (exact.verdict, Verdict.UNKNOWN)
    A, arena, exact = results["predict"]
    res = solve_threshold(arena, A, 1)
    assert res.verdict == Verdict.UNKNOWN and "mixes" in res.diagnostic


def test_threshold_for_player_i():
    # the same arena with the goal flipped: Player I wins by never revealing a letter
    A = dataclasses.replace(example("unrevealed"), acceptance=parse_formula("!B(z)"))
    arena = build_arena(ProductAutomaton(A))
    assert solve_threshold(arena, A, 0).verdict == Verdict.I_WINS


def test_threshold_negated_disjunction_is_not_misread():
    # O wants some counter unbounded and can pump z; keeping the idle y bounded is not enough for I
    A = dataclasses.replace(example("lookahead2"), counters=("z", "y"), acceptance=parse_formula("!B(z) | !B(y)"))
    arena = build_arena(ProductAutomaton(A))
    assert solve_threshold(arena, A, 1).verdict == Verdict.UNKNOWN


def test_threshold_constant_condition():
    A = dataclasses.replace(example("lookahead2"), acceptance=parse_formula("true"))
    arena = build_arena(ProductAutomaton(A))
    assert solve_threshold(arena, A, 0).verdict == Verdict.O_WINS


def test_random_parity_games_are_determined():
    rng = random.Random(5)
    alph = tuple((a, b) for a in "01" for b in "01")
    for _ in range(8):
        states = ("p", "q", "r")
        delta = {(s, x): rng.choice(states) for s in states for x in alph}
        colors = {s: rng.randint(0, 3) for s in states}
        A = parity_automaton(states, alph, "p", delta, colors)
        try:
            arena = build_arena(ProductAutomaton(A), max_vertices=20000)
        except CapacityError:
            continue
        decl = ParityDeclaration(dict(zip(A.counters, sorted({colors[s] for s in states}))))
        if not validate_parity_fragment(A, decl):
            continue
        res = solve_exact_parity(arena, A, decl)
        assert validate_strategy(extract_strategy(res))
        cond = ConditionAutomaton(arena)
        assert cond.replay([])[0] == A.state_index["p"]
