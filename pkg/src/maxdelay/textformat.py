"""Line-oriented text format for max-automata.

::

    maxautomaton
    alphabet_in: 0 1
    alphabet_out: 0 1
    states: s t
    initial: s
    counters: c
    trans: s 0|1 -> t [inc c; reset c]
    accept: !B(c) | true

Plain alphabets use ``alphabet: a b``.  Paired letters are written ``in|out``.
Comments are whole lines starting with ``#`` (``#`` is also a legal letter).
"""
from __future__ import annotations

import re
from typing import Dict, List, Tuple

from .automata import (
    And,
    Bounded,
    Const,
    Formula,
    Inc,
    Max,
    MaxAutomaton,
    Not,
    Or,
    Reset,
    StructureError,
    letter_str,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, source: str = "<string>"):
        self.line = line
        self.source = source
        loc = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(loc + message)


# --------------------------------------------------------------------------
# formulas

_TOKEN = re.compile(r"\s*(?:(B\(\s*([^()\s]+)\s*\))|(true|false)|([!&|()]))")


def parse_formula(text: str) -> Formula:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad formula near {text[pos:]!r}")
        if m.group(1):
            tokens.append(("atom", m.group(2)))
        elif m.group(3):
            tokens.append(("const", m.group(3) == "true"))
        else:
            tokens.append((m.group(4), None))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i][0]

    def take(kind):
        nonlocal i
        if tokens[i][0] != kind:
            raise ValueError(f"expected {kind!r} in formula {text!r}")
        tok = tokens[i]
        i += 1
        return tok

    def disj():
        parts = [conj()]
        while peek() == "|":
            take("|")
            parts.append(conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj():
        parts = [unary()]
        while peek() == "&":
            take("&")
            parts.append(unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary():
        kind = peek()
        if kind == "!":
            take("!")
            return Not(unary())
        if kind == "(":
            take("(")
            f = disj()
            take(")")
            return f
        if kind == "atom":
            return Bounded(take("atom")[1])
        if kind == "const":
            return Const(take("const")[1])
        raise ValueError(f"unexpected token {kind!r} in formula {text!r}")

    f = disj()
    take("end")
    return f


# --------------------------------------------------------------------------
# ops

def parse_ops(text: str) -> Tuple:
    """``inc c; reset c; max c c0 c1``, optionally in square brackets."""
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    ops = []
    for part in text.split(";"):
        words = part.split()
        if not words:
            continue
        kind, args = words[0], words[1:]
        if kind == "inc" and len(args) == 1:
            ops.append(Inc(args[0]))
        elif kind == "reset" and len(args) == 1:
            ops.append(Reset(args[0]))
        elif kind == "max" and len(args) == 3:
            ops.append(Max(*args))
        else:
            raise ValueError(f"bad counter operation {part.strip()!r}")
    return tuple(ops)


def format_ops(ops) -> str:
    return "[" + "; ".join(str(op) for op in ops) + "]"


# --------------------------------------------------------------------------
# automata

_TRANS = re.compile(r"^(\S+)\s+(\S+)\s*->\s*(\S+)\s*\[(.*)\]\s*$")


def parse_letter(token: str, paired: bool):
    if paired:
        if token.count("|") != 1:
            raise ValueError(f"paired letter must be written in|out, got {token!r}")
        a, b = token.split("|")
        return (a, b)
    return token


def loads(text: str, source: str = "<string>") -> MaxAutomaton:
    header_seen = False
    fields: Dict[str, Tuple[int, str]] = {}
    transitions: List[Tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "maxautomaton":
                raise ParseError("expected header 'maxautomaton'", lineno, source)
            header_seen = True
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError(f"expected 'key: value', got {line!r}", lineno, source)
        key = key.strip()
        if key == "trans":
            transitions.append((lineno, value.strip()))
        elif key in ("alphabet", "alphabet_in", "alphabet_out", "states", "initial", "counters", "accept"):
            if key in fields:
                raise ParseError(f"duplicate {key!r}", lineno, source)
            fields[key] = (lineno, value.strip())
        else:
            raise ParseError(f"unknown key {key!r}", lineno, source)
    if not header_seen:
        raise ParseError("empty input; expected header 'maxautomaton'", 0, source)

    def need(key):
        if key not in fields:
            raise ParseError(f"missing {key!r}", 0, source)
        return fields[key]

    paired = "alphabet_in" in fields or "alphabet_out" in fields
    if paired:
        if "alphabet" in fields:
            raise ParseError("use either 'alphabet' or 'alphabet_in'/'alphabet_out'", fields["alphabet"][0], source)
        ins = need("alphabet_in")[1].split()
        outs = need("alphabet_out")[1].split()
        for tok in ins + outs:
            if "|" in tok:
                raise ParseError(f"letter {tok!r} may not contain '|'", fields["alphabet_in"][0], source)
        alphabet = tuple((a, b) for a in ins for b in outs)
    else:
        alphabet = tuple(need("alphabet")[1].split())
    states = tuple(need("states")[1].split())
    initial = need("initial")[1]
    counters = tuple(fields["counters"][1].split()) if "counters" in fields else ()
    acc_line, acc_text = fields.get("accept", (0, "true"))
    try:
        acceptance = parse_formula(acc_text)
    except ValueError as e:
        raise ParseError(str(e), acc_line, source) from None

    delta = {}
    labels = {}
    for lineno, body in transitions:
        m = _TRANS.match(body)
        if not m:
            raise ParseError(f"bad transition {body!r}; expected 'q a -> q2 [ops]'", lineno, source)
        q, tok, target, ops_text = m.groups()
        try:
            a = parse_letter(tok, paired)
            ops = parse_ops(ops_text)
        except ValueError as e:
            raise ParseError(str(e), lineno, source) from None
        if (q, a) in delta:
            raise ParseError(f"duplicate transition for ({q}, {tok})", lineno, source)
        if q not in states or target not in states:
            raise ParseError(f"undeclared state in transition {body!r}", lineno, source)
        if a not in alphabet:
            raise ParseError(f"letter {tok!r} not in alphabet", lineno, source)
        delta[q, a] = target
        labels[q, a] = ops
    try:
        return MaxAutomaton(states, counters, alphabet, initial, delta, labels, acceptance)
    except StructureError as e:
        raise ParseError(str(e), 0, source) from None


def load(path) -> MaxAutomaton:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror}", 0, str(path)) from None
    return loads(text, str(path))


def dumps(A: MaxAutomaton) -> str:
    lines = ["maxautomaton"]
    if A.is_paired and set(A.alphabet) == {(a, b) for a in A.in_alphabet for b in A.out_alphabet}:
        lines.append("alphabet_in: " + " ".join(map(str, A.in_alphabet)))
        lines.append("alphabet_out: " + " ".join(map(str, A.out_alphabet)))
    else:
        lines.append("alphabet: " + " ".join(letter_str(a) for a in A.alphabet))
    lines.append("states: " + " ".join(map(str, A.states)))
    lines.append(f"initial: {A.initial}")
    if A.counters:
        lines.append("counters: " + " ".join(A.counters))
    for q in A.states:
        for a in A.alphabet:
            lines.append(f"trans: {q} {letter_str(a)} -> {A.delta[q, a]} {format_ops(A.labels[q, a])}")
    lines.append(f"accept: {A.acceptance}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# words

def parse_word(text: str, A: MaxAutomaton) -> Tuple:
    """Letters separated by whitespace; a token without spaces splits per character."""
    text = text.strip()
    if not text:
        return ()
    tokens = text.split()
    if len(tokens) == 1 and not A.is_paired and tokens[0] not in A.alphabet:
        tokens = list(tokens[0])
    word = tuple(parse_letter(t, A.is_paired) for t in tokens)
    for a in word:
        if a not in A.alphabet:
            raise ValueError(f"letter {letter_str(a)!r} not in alphabet")
    return word
