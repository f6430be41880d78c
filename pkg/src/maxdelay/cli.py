"""Command-line entry point: ``maxdelay <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional

from . import bounds as bounds_mod
from . import delay
from .automata import LassoWord, StructureError, accepts_lasso, letter_str
from .equivalence import CapacityError, build_tracker
from .reduction import ProductAutomaton, build_arena
from .solving import (
    EXIT_CODES,
    ConditionAutomaton,
    FiniteMemoryStrategy,
    ParityDeclaration,
    Verdict,
    build_parity_game,
    extract_strategy,
    parse_strategy_lines,
    solve_exact_parity,
    solve_threshold,
)
from .textformat import ParseError, load, parse_word

EXIT_USAGE = 64
EXIT_DATAERR = 65
CONFIG_ENV = "MAXDELAY_CONFIG"
COMMANDS = ("accept-lasso", "eq-classes", "build-game", "solve", "bounds", "play", "verify-lemma4", "selftest")

log = logging.getLogger("maxdelay")


@dataclass
class Config:
    tracker_cap: int = 10**6
    arena_cap: int = 10**5
    map_cap: int = 10**5
    game_cap: int = 10**6
    threshold_schedule: List[int] = field(default_factory=lambda: [0, 1, 2, 4])
    seed: int = 0
    verbosity: str = "WARNING"

    def __post_init__(self):
        for name in ("tracker_cap", "arena_cap", "map_cap", "game_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"config: {name} must be positive")
        if any(b < 0 for b in self.threshold_schedule):
            raise ValueError("config: threshold bounds must be nonnegative")

    @classmethod
    def from_env(cls) -> "Config":
        path = os.environ.get(CONFIG_ENV)
        if not path:
            return cls()
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"config: unknown keys {sorted(unknown)}")
        return cls(**data)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maxdelay", description="Max-automata, delay games and their delay-free reduction.")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    s = sub.add_parser("accept-lasso", help="decide acceptance of u v^omega")
    s.add_argument("automaton")
    s.add_argument("--prefix", default="", help="letters of u (space separated, or one token split per character)")
    s.add_argument("--loop", required=True, help="letters of v")

    s = sub.add_parser("eq-classes", help="word classes and the tracker automaton")
    s.add_argument("automaton")
    s.add_argument("--cap", type=int, help="maximal number of classes")

    s = sub.add_parser("build-game", help="emit the delay-free game arena")
    s.add_argument("automaton")
    s.add_argument("--stats", action="store_true")

    s = sub.add_parser("solve", help="solve the delay-free game (exit 0 O wins, 1 I wins, 2 unknown)")
    s.add_argument("automaton")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--parity", metavar="DECL", help="color declaration file: lines '<counter> <color>'")
    mode.add_argument("--threshold", type=int, metavar="B")
    s.add_argument("--emit-strategy", metavar="FILE")
    s.add_argument("--json", action="store_true")

    s = sub.add_parser(
        "bounds",
        help="delay bound 2^(2^(2n(log n + 6k^2)) + 1)",
        description="Print n (states), k (counters) and the bound 2^(2^E + 1) with "
        "E = 2n(ceil(log2 n) + 6k^2).  The logarithm is taken base 2 and rounded up. "
        f"The exact integer is printed when E <= {bounds_mod.EXACT_LIMIT}; otherwise its digit count.",
    )
    s.add_argument("automaton")

    s = sub.add_parser("play", help="simulate a delay game")
    s.add_argument("automaton")
    s.add_argument("--delay", required=True, help="const:d or table:f0,f1,...;tail=t")
    s.add_argument("--pO", required=True,
                   help="section5 | const:<letter> | random:<seed> | <file of 'at v mem m choose w' lines>")
    s.add_argument("--pI", required=True, help="section5 | script:<letters or file> | random:<seed> | interactive")
    s.add_argument("--rounds", type=int, default=20)
    s.add_argument("--record", metavar="FILE")

    s = sub.add_parser("verify-lemma4", help="property battery for witness languages")
    s.add_argument("automaton")
    s.add_argument("--seed", type=int)
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("selftest", help="randomized consistency suite with a fixed seed")
    s.add_argument("--seed", type=int)
    s.add_argument("--scale", type=float, default=0.2, help="fraction of the full test sizes")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    if not argv or (argv[0] not in COMMANDS and argv[0] not in ("-h", "--help")):
        parser.print_usage(sys.stderr)
        if argv:
            print(f"maxdelay: unknown subcommand {argv[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        cfg = Config.from_env()
    except (OSError, ValueError, TypeError) as e:
        print(f"maxdelay: bad config: {e}", file=sys.stderr)
        return EXIT_DATAERR
    logging.basicConfig(level=getattr(logging, cfg.verbosity.upper(), logging.WARNING))
    handler = globals()["cmd_" + args.cmd.replace("-", "_")]
    try:
        return handler(args, cfg)
    except (ParseError, StructureError) as e:
        print(f"maxdelay: {e}", file=sys.stderr)
        return EXIT_DATAERR
    except CapacityError as e:
        print(f"maxdelay: {e}", file=sys.stderr)
        return EXIT_CODES[Verdict.UNKNOWN]


def _load(path):
    return load(path)


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror}", 0, str(path)) from None


def cmd_accept_lasso(args, cfg) -> int:
    A = _load(args.automaton)
    try:
        w = LassoWord(parse_word(args.prefix, A), parse_word(args.loop, A))
    except ValueError as e:
        raise ParseError(str(e), 0, "<command line>") from None
    print("ACCEPT" if accepts_lasso(A, w) else "REJECT")
    return 0


def cmd_eq_classes(args, cfg) -> int:
    A = _load(args.automaton)
    T = build_tracker(A, args.cap or cfg.tracker_cap)
    print(f"classes: {len(T)}")
    for i in range(len(T)):
        print(f"class {i} rep {' '.join(letter_str(a) for a in T.rep(i)) or 'eps'}")
    for i, a, j in T.table():
        print(f"delta {i} {letter_str(a)} {j}")
    return 0


def _arena(A, cfg):
    P = ProductAutomaton(A, tracker_cap=cfg.tracker_cap)
    return build_arena(P, cfg.arena_cap, cfg.map_cap)


def cmd_build_game(args, cfg) -> int:
    arena = _arena(_load(args.automaton), cfg)
    if args.stats:
        for key, value in arena.stats().items():
            print(f"{key}: {value}")
        for D, ids in sorted(arena.domain_R.items(), key=lambda kv: sorted(kv[0])):
            print(f"domain {{{' '.join(arena.P.describe(p) for p in sorted(D))}}} R={len(ids)}")
    else:
        sys.stdout.write(arena.dumps())
    return 0


def cmd_solve(args, cfg) -> int:
    A = _load(args.automaton)
    arena = _arena(A, cfg)
    if args.parity:
        try:
            decl = ParityDeclaration.parse(_read_text(args.parity))
        except ValueError as e:
            raise ParseError(str(e), 0, args.parity) from None
        try:
            result = solve_exact_parity(arena, A, decl)
        except ValueError as e:
            print(f"maxdelay: {e}", file=sys.stderr)
            return EXIT_DATAERR
    else:
        schedule = [args.threshold] if args.threshold is not None else cfg.threshold_schedule
        result = None
        for b in schedule:
            result = solve_threshold(arena, A, b, cfg.game_cap)
            if result.verdict != Verdict.UNKNOWN:
                break
    if args.emit_strategy:
        if result.mode == "EXACT_PARITY":
            s = extract_strategy(result)
            with open(args.emit_strategy, "w", encoding="utf-8") as fh:
                fh.write("\n".join(s.lines()) + "\n")
        else:
            print("maxdelay: no strategy in threshold mode", file=sys.stderr)
    if args.json:
        print(json.dumps(result.as_dict(), sort_keys=True))
    else:
        extra = f" (B={result.bound})" if result.bound is not None else ""
        print(f"{result.verdict.value} [{result.mode}{extra}]")
        if result.diagnostic:
            print(result.diagnostic)
    return EXIT_CODES[result.verdict]


def cmd_bounds(args, cfg) -> int:
    A = _load(args.automaton)
    for line in bounds_mod.delay_bound(len(A.states), len(A.counters)).lines():
        print(line)
    return 0


def _player_o(spec, A, f, cfg):
    if spec == "section5":
        return delay.section5_strategy_O(f)
    kind, _, rest = spec.partition(":")
    if kind == "const" and rest:
        return delay.ConstantPlayerO(rest)
    if kind == "random" and rest:
        return delay.RandomPlayerO(A.out_alphabet, int(rest))
    # strategy file for the delay-free game
    arena = _arena(A, cfg)
    game = build_parity_game(arena, ConditionAutomaton(arena), ParityDeclaration({}), cfg.game_cap)
    choice = {}
    try:
        lines = parse_strategy_lines(_read_text(spec))
    except ValueError as e:
        raise ParseError(str(e), 0, spec) from None
    for (v, m), w in lines.items():
        if (v, m) not in game.index or (w, m) not in game.index:
            raise ParseError(f"strategy mentions unknown vertex/memory pair ({v}, {m}) -> {w}", 0, spec)
        choice[game.index[v, m]] = game.index[w, m]
    s = FiniteMemoryStrategy(0, game, choice, set(range(len(game.nodes))))
    return delay.transfer_strategy_from_game(arena, s)


def _player_i(spec, A, f):
    if spec == "section5":
        if not f.is_constant:
            raise ValueError("the section5 Player I strategy needs a constant delay")
        return delay.section5_strategy_I(f(0))
    kind, _, rest = spec.partition(":")
    if kind == "random" and rest:
        return delay.RandomPlayerI(f, A.in_alphabet, int(rest))
    if kind == "script" and rest:
        text = _read_text(rest) if os.path.exists(rest) else rest
        tokens = text.split()
        word = tokens if len(tokens) > 1 else list(text.strip())
        bad = [a for a in word if a not in A.in_alphabet]
        if bad:
            raise ParseError(f"script letter {bad[0]!r} not an input letter", 0, "<script>")
        return delay.ScriptedPlayerI(f, word)
    raise ValueError(f"unknown Player I spec {spec!r}")


def cmd_play(args, cfg) -> int:
    A = _load(args.automaton)
    if not A.is_paired:
        raise StructureError("play needs an automaton over input/output pairs")
    try:
        f = delay.DelayFunction.parse(args.delay)
    except ValueError as e:
        print(f"maxdelay: {e}", file=sys.stderr)
        return EXIT_USAGE
    sO = _player_o(args.pO, A, f, cfg)
    if args.pI == "interactive":
        rec = delay.interactive_play(A, f, sO, max_rounds=args.rounds)
    else:
        try:
            sI = _player_i(args.pI, A, f)
        except ValueError as e:
            print(f"maxdelay: {e}", file=sys.stderr)
            return EXIT_USAGE
        try:
            rec = delay.play(f, sI, sO, args.rounds)
        except delay.ProtocolError as e:
            print(f"maxdelay: protocol violation: {e}", file=sys.stderr)
            return EXIT_DATAERR
    text = rec.dumps()
    sys.stdout.write(text)
    for note in rec.notes:
        print(f"note: {note}")
    if rec.rounds:
        print(f"state={delay.outcome_states(A, rec.outcome)[-1]}")
    if args.record:
        with open(args.record, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_verify_lemma4(args, cfg) -> int:
    from .verify import lemma4_battery

    A = _load(args.automaton)
    P = ProductAutomaton(A, tracker_cap=cfg.tracker_cap)
    seed = cfg.seed if args.seed is None else args.seed
    results = lemma4_battery(P, seed=seed, bound_max_n=None)
    if args.json:
        print(json.dumps([r.as_dict() for r in results.values()], sort_keys=True))
    else:
        for r in results.values():
            status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
            print(f"item {r.item} {status} ({r.checked} checks) {r.name}")
            for msg in r.failures:
                print(f"  {msg}")
    return 0 if all(r.passed for r in results.values()) else 1


def cmd_selftest(args, cfg) -> int:
    from .selftest import run_selftest

    seed = cfg.seed if args.seed is None else args.seed
    ok = True
    for name, passed, detail in run_selftest(seed, args.scale):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
