"""Fixed grammars and benchmark input families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .grammar import Grammar, parse_grammar

EXP_GRAMMAR = """\
S <- A !.
A <- 'a' A 'b' / 'a' A 'c' / ''
"""

ANBNCN_GRAMMAR = """\
S <- &(A !'b') 'a'* B !.
A <- 'a' A? 'b'
B <- 'b' B? 'c'
"""

STATEMENTS_GRAMMAR = """\
Prog <- S !.
S <- 'if' E S ('else' S)? / 'while' E S / 'begin' S+ 'end' / 'set' L E
E <- 'e'
L <- 'l'
"""

LEFT_RECURSIVE = "A <- A\n"
NULLABLE_LEFT_RECURSIVE = "A <- '' A\n"

# statements cycled inside begin ... end
_STATEMENT_CYCLE = [
    b"setle",
    b"ifesetle",
    b"whileesetle",
    b"ifesetleelsesetle",
    b"beginsetlesetleend",
    b"whileebeginsetleend",
]


def exp_input(n: int) -> bytes:
    return b"a" * n + b"c" * n


def anbncn_input(n: int, m: int | None = None) -> bytes:
    return b"a" * n + b"b" * n + b"c" * (n if m is None else m)


def statements_input(n: int) -> bytes:
    """A valid program of at least ``n`` bytes."""
    body = bytearray()
    i = 0
    while len(body) + len(b"beginend") < n or i == 0:
        body += _STATEMENT_CYCLE[i % len(_STATEMENT_CYCLE)]
        i += 1
    return b"begin" + bytes(body) + b"end"


def anbncn_oracle(s: bytes) -> bool:
    """Direct check for a^k b^k c^k with k >= 1."""
    k = len(s) // 3
    return k >= 1 and s == b"a" * k + b"b" * k + b"c" * k


@dataclass(frozen=True)
class Family:
    name: str
    source: str
    make_input: Callable[[int], bytes]

    def grammar(self) -> Grammar:
        return parse_grammar(self.source)


FAMILIES = {
    "exp-grammar": Family("exp-grammar", EXP_GRAMMAR, exp_input),
    "anbncn": Family("anbncn", ANBNCN_GRAMMAR, anbncn_input),
    "statements": Family("statements", STATEMENTS_GRAMMAR, statements_input),
}
