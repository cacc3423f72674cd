"""Surface PEG grammars: parsing, interning, desugaring, well-formedness.

Grammar files use the usual PEG surface syntax::

    # comments run to end of line
    S <- A !.
    A <- 'a' A 'b' / 'a' A 'c' / ''

Literals may be single- or double-quoted; ``''`` is the empty expression.
Input symbols are bytes, so non-ASCII text in a literal becomes a sequence
of its UTF-8 bytes.  The first rule is the start rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

import networkx as nx

# core forms
CHAR = "char"
EMPTY = "empty"
NT = "nt"
NOT = "not"
SEQ = "seq"
ALT = "alt"
ANY = "any"
# sugar forms, gone after desugar()
STAR = "star"
PLUS = "plus"
OPT = "opt"
AND = "and"
CLASS = "class"

CORE_KINDS = frozenset({CHAR, EMPTY, NT, NOT, SEQ, ALT, ANY})
SUGAR_KINDS = frozenset({STAR, PLUS, OPT, AND, CLASS})
REP_PREFIX = "%rep"


class GrammarError(ValueError):
    """Raised for malformed grammar text or an inconsistent rule set."""


class GrammarSyntaxError(GrammarError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class Expr(NamedTuple):
    """One stored expression node.

    ``a``/``b`` hold node ids for compound kinds, the byte value for
    ``char``, the rule name for ``nt`` and a sorted byte tuple for
    ``class``.
    """

    kind: str
    a: object = None
    b: object = None


class NodeStore:
    """Append-only hash-consed expression store."""

    def __init__(self) -> None:
        self._nodes: list[Expr] = []
        self._index: dict[Expr, int] = {}

    def intern(self, e: Expr) -> int:
        nid = self._index.get(e)
        if nid is None:
            nid = len(self._nodes)
            self._nodes.append(e)
            self._index[e] = nid
        return nid

    def __getitem__(self, nid: int) -> Expr:
        return self._nodes[nid]

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[Expr]:
        return iter(self._nodes)

    # convenience constructors
    def char(self, byte: int) -> int:
        return self.intern(Expr(CHAR, byte))

    def empty(self) -> int:
        return self.intern(Expr(EMPTY))

    def any(self) -> int:
        return self.intern(Expr(ANY))

    def nt(self, name: str) -> int:
        return self.intern(Expr(NT, name))

    def not_(self, child: int) -> int:
        return self.intern(Expr(NOT, child))

    def seq(self, left: int, right: int) -> int:
        return self.intern(Expr(SEQ, left, right))

    def alt(self, first: int, second: int) -> int:
        return self.intern(Expr(ALT, first, second))

    def seq_of(self, items: list[int]) -> int:
        if not items:
            return self.empty()
        out = items[-1]
        for item in reversed(items[:-1]):
            out = self.seq(item, out)
        return out

    def alt_of(self, items: list[int]) -> int:
        out = items[-1]
        for item in reversed(items[:-1]):
            out = self.alt(item, out)
        return out


def intern(e: Expr, store: NodeStore) -> int:
    return store.intern(e)


@dataclass
class Grammar:
    """Rule map R, start expression and the node store both index into."""

    rules: dict[str, int]
    start: int
    store: NodeStore
    start_rule: str | None = None
    source: str | None = field(default=None, compare=False, repr=False)

    @property
    def nonterminals(self) -> list[str]:
        return list(self.rules)

    def body(self, name: str) -> int:
        return self.rules[name]

    def node(self, nid: int) -> Expr:
        return self.store[nid]

    def reachable(self, root: int) -> set[int]:
        """Node ids reachable from ``root`` without entering rule bodies."""
        seen: set[int] = set()
        stack = [root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            e = self.store[nid]
            if e.kind in (NOT, STAR, PLUS, OPT, AND):
                stack.append(e.a)
            elif e.kind in (SEQ, ALT):
                stack.append(e.a)
                stack.append(e.b)
        return seen

    def is_core(self) -> bool:
        ids = set()
        for body in self.rules.values():
            ids |= self.reachable(body)
        ids |= self.reachable(self.start)
        return all(self.store[i].kind in CORE_KINDS for i in ids)

    def to_source(self) -> str:
        lines = [f"{name} <- {format_expr(self, body)}" for name, body in self.rules.items()]
        return "\n".join(lines) + "\n"

    def canonical(self) -> tuple:
        """Store-independent structural form, used to compare grammars."""
        return (
            tuple((name, _canon(self, body)) for name, body in self.rules.items()),
            _canon(self, self.start),
        )


def _canon(g: Grammar, nid: int) -> tuple:
    e = g.store[nid]
    if e.kind in (SEQ, ALT):
        return (e.kind, _canon(g, e.a), _canon(g, e.b))
    if e.kind in (NOT, STAR, PLUS, OPT, AND):
        return (e.kind, _canon(g, e.a))
    return (e.kind, e.a)


# ---------------------------------------------------------------------------
# printing

_PRINTABLE = set(range(0x20, 0x7F)) - {ord("'"), ord("\\"), ord('"')}


def _escape_byte(b: int, in_class: bool = False) -> str:
    if in_class and b in (ord("]"), ord("-"), ord("[")):
        return "\\" + chr(b)
    if b in _PRINTABLE:
        return chr(b)
    return {9: "\\t", 10: "\\n", 13: "\\r", 39: "\\'", 34: '\\"', 92: "\\\\"}.get(b, f"\\x{b:02x}")


_PREC = {ALT: 0, SEQ: 1, NOT: 2, AND: 2, STAR: 3, PLUS: 3, OPT: 3}


def format_expr(g: Grammar, nid: int, prec: int = 0) -> str:
    e = g.store[nid]
    k = e.kind
    if k == CHAR:
        return "'" + _escape_byte(e.a) + "'"
    if k == EMPTY:
        return "''"
    if k == ANY:
        return "."
    if k == NT:
        return e.a
    if k == CLASS:
        return "[" + "".join(_escape_byte(b, True) for b in e.a) + "]"
    if k == ALT:
        text = f"{format_expr(g, e.a, 1)} / {format_expr(g, e.b, 0)}"
    elif k == SEQ:
        text = f"{format_expr(g, e.a, 2)} {format_expr(g, e.b, 1)}"
    elif k in (NOT, AND):
        text = ("!" if k == NOT else "&") + format_expr(g, e.a, 3)
    else:
        text = format_expr(g, e.a, 4) + {STAR: "*", PLUS: "+", OPT: "?"}[k]
    if _PREC[k] < prec:
        text = f"({text})"
    return text


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<arrow><-)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
  | (?P<cls>\[(?:[^\]\\]|\\.)*\])
  | (?P<op>[/!&*+?().])
    """,
    re.VERBOSE | re.DOTALL,
)

_SIMPLE_ESCAPES = {
    "n": 10, "t": 9, "r": 13, "f": 12, "v": 11, "0": 0,
    "\\": 92, "'": 39, '"': 34, "[": 91, "]": 93, "-": 45,
}


class _Tok(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise GrammarSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok_text = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, tok_text, line, col))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + tok_text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _decode_chars(body: str, tok: _Tok) -> list[int]:
    """Unescape literal/class contents into a byte list."""
    out: list[int] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body):
                raise GrammarSyntaxError("dangling escape", tok.line, tok.col)
            nxt = body[i + 1]
            if nxt == "x":
                hexdigits = body[i + 2:i + 4]
                if len(hexdigits) != 2 or not all(c in "0123456789abcdefABCDEF" for c in hexdigits):
                    raise GrammarSyntaxError("bad \\x escape", tok.line, tok.col)
                out.append(int(hexdigits, 16))
                i += 4
                continue
            if nxt not in _SIMPLE_ESCAPES:
                raise GrammarSyntaxError(f"unknown escape \\{nxt}", tok.line, tok.col)
            out.append(_SIMPLE_ESCAPES[nxt])
            i += 2
        else:
            out.extend(ch.encode("utf-8"))
            i += 1
    return out


def _decode_class(body: str, tok: _Tok) -> tuple[int, ...]:
    # ranges are resolved on single-byte units; "a-c" and "\x00-\x1f" both work
    units: list[tuple[int, bool]] = []  # (byte, escaped)
    i = 0
    while i < len(body):
        if body[i] == "\\":
            j = i + 4 if body[i + 1:i + 2] == "x" else i + 2
            units.extend((b, True) for b in _decode_chars(body[i:j], tok))
            i = j
        else:
            encoded = body[i].encode("utf-8")
            if len(encoded) != 1:
                raise GrammarSyntaxError(
                    f"non-byte character {body[i]!r} in class; use \\xHH", tok.line, tok.col
                )
            units.append((encoded[0], False))
            i += 1
    members: set[int] = set()
    k = 0
    while k < len(units):
        b, _ = units[k]
        if k + 2 < len(units) and units[k + 1] == (ord("-"), False):
            hi = units[k + 2][0]
            if hi < b:
                raise GrammarSyntaxError("reversed class range", tok.line, tok.col)
            members.update(range(b, hi + 1))
            k += 3
        else:
            members.add(b)
            k += 1
    return tuple(sorted(members))


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.store = NodeStore()
        self.refs: list[tuple[str, _Tok]] = []

    def peek(self, offset: int = 0) -> _Tok:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise GrammarSyntaxError(message, tok.line, tok.col)

    def expect_op(self, text: str) -> None:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        self.take()

    def grammar(self) -> Grammar:
        rules: dict[str, int] = {}
        first = None
        if self.peek().kind == "eof":
            self.error("grammar has no rules")
        while self.peek().kind != "eof":
            name_tok = self.take()
            if name_tok.kind != "ident":
                self.error("expected rule name", name_tok)
            if self.peek().kind != "arrow":
                self.error("expected '<-'")
            self.take()
            if name_tok.text in rules:
                self.error(f"duplicate rule {name_tok.text}", name_tok)
            rules[name_tok.text] = self.alternation()
            first = first or name_tok.text
        for name, tok in self.refs:
            if name not in rules:
                raise GrammarSyntaxError(f"undefined nonterminal {name}", tok.line, tok.col)
        return Grammar(rules=rules, start=rules[first], store=self.store, start_rule=first)

    def alternation(self) -> int:
        items = [self.sequence()]
        while self.peek().kind == "op" and self.peek().text == "/":
            self.take()
            items.append(self.sequence())
        return self.store.alt_of(items)

    def _starts_primary(self) -> bool:
        tok = self.peek()
        if tok.kind == "ident":
            return self.peek(1).kind != "arrow"
        if tok.kind in ("str", "cls"):
            return True
        return tok.kind == "op" and tok.text in "!&(."

    def sequence(self) -> int:
        items = []
        while self._starts_primary():
            items.append(self.prefixed())
        if not items:
            self.error("empty sequence; write '' for the empty expression")
        return self.store.seq_of(items)

    def prefixed(self) -> int:
        tok = self.peek()
        if tok.kind == "op" and tok.text in "!&":
            self.take()
            child = self.prefixed()
            return self.store.intern(Expr(NOT if tok.text == "!" else AND, child))
        return self.suffixed()

    def suffixed(self) -> int:
        nid = self.primary()
        while self.peek().kind == "op" and self.peek().text in "*+?":
            op = self.take().text
            nid = self.store.intern(Expr({"*": STAR, "+": PLUS, "?": OPT}[op], nid))
        return nid

    def primary(self) -> int:
        tok = self.take()
        s = self.store
        if tok.kind == "ident":
            self.refs.append((tok.text, tok))
            return s.nt(tok.text)
        if tok.kind == "str":
            return s.seq_of([s.char(b) for b in _decode_chars(tok.text[1:-1], tok)])
        if tok.kind == "cls":
            return s.intern(Expr(CLASS, _decode_class(tok.text[1:-1], tok)))
        if tok.kind == "op" and tok.text == ".":
            return s.any()
        if tok.kind == "op" and tok.text == "(":
            nid = self.alternation()
            self.expect_op(")")
            return nid
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse_grammar(text: str | bytes) -> Grammar:
    """Parse grammar source; sugar forms are kept intact."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise GrammarError(f"grammar is not valid UTF-8: {exc}") from None
    g = _Parser(text).grammar()
    g.source = text
    return g


def grammar_from_rules(rules: Iterable[tuple[str, str]]) -> Grammar:
    return parse_grammar("\n".join(f"{name} <- {rhs}" for name, rhs in rules))


# ---------------------------------------------------------------------------
# desugaring


def desugar(g: Grammar) -> Grammar:
    """Rewrite sugar into the core forms.

    ``α*`` becomes a fresh ``%repN := α %repN / ε``; structurally identical
    bodies share one nonterminal.  ``α+`` is ``α %repN``, ``α?`` is
    ``α / ε``, ``&α`` is ``!!α`` and ``[...]`` is an ascending alternation
    of byte literals.  Fresh names are numbered in post-order of the
    first traversal that reaches them.
    """
    out = NodeStore()
    rules: dict[str, int] = {}
    rep_for_body: dict[int, str] = {}
    rep_rules: dict[str, int] = {}
    memo: dict[int, int] = {}
    # existing %rep rules (re-desugaring) keep their names
    taken = sum(1 for name in g.rules if name.startswith(REP_PREFIX))

    def rep(body: int) -> int:
        nonlocal taken
        name = rep_for_body.get(body)
        if name is None:
            name = f"{REP_PREFIX}{taken}"
            taken += 1
            rep_for_body[body] = name
            ref = out.nt(name)
            rep_rules[name] = out.alt(out.seq(body, ref), out.empty())
        return out.nt(name)

    def walk(nid: int) -> int:
        done = memo.get(nid)
        if done is not None:
            return done
        e = g.store[nid]
        k = e.kind
        if k == CHAR:
            r = out.char(e.a)
        elif k == EMPTY:
            r = out.empty()
        elif k == ANY:
            r = out.any()
        elif k == NT:
            r = out.nt(e.a)
        elif k == NOT:
            r = out.not_(walk(e.a))
        elif k == SEQ:
            r = out.seq(walk(e.a), walk(e.b))
        elif k == ALT:
            r = out.alt(walk(e.a), walk(e.b))
        elif k == STAR:
            r = rep(walk(e.a))
        elif k == PLUS:
            body = walk(e.a)
            r = out.seq(body, rep(body))
        elif k == OPT:
            r = out.alt(walk(e.a), out.empty())
        elif k == AND:
            r = out.not_(out.not_(walk(e.a)))
        elif k == CLASS:
            r = out.alt_of([out.char(b) for b in e.a]) if e.a else out.not_(out.empty())
        else:  # pragma: no cover
            raise GrammarError(f"unknown expression kind {k}")
        memo[nid] = r
        return r

    for name, body in g.rules.items():
        rules[name] = walk(body)
    start = walk(g.start)
    rules.update(rep_rules)
    return Grammar(rules=rules, start=start, store=out, start_rule=g.start_rule)


# ---------------------------------------------------------------------------
# well-formedness


@dataclass
class WellFormednessReport:
    well_formed: bool
    offending_cycles: list[list[str]] = field(default_factory=list)
    nullable_nonterminals: set[str] = field(default_factory=set)

    def describe(self) -> str:
        if self.well_formed:
            return "well-formed"
        cycles = "; ".join(" -> ".join(c + [c[0]]) for c in self.offending_cycles)
        return f"left-recursive: {cycles}"


def nullable_nodes(g: Grammar) -> set[int]:
    """Core node ids that can succeed without consuming input (fixed point)."""
    nodes = range(len(g.store))
    nullable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for nid in nodes:
            if nid in nullable:
                continue
            e = g.store[nid]
            k = e.kind
            if k in (EMPTY, NOT):
                ok = True
            elif k == NT:
                ok = g.rules[e.a] in nullable
            elif k == SEQ:
                ok = e.a in nullable and e.b in nullable
            elif k == ALT:
                ok = e.a in nullable or e.b in nullable
            else:
                ok = False
            if ok:
                nullable.add(nid)
                changed = True
    return nullable


def _same_position_calls(g: Grammar, nid: int, nullable: set[int], out: set[str], seen: set[int]) -> None:
    if nid in seen:
        return
    seen.add(nid)
    e = g.store[nid]
    if e.kind == NT:
        out.add(e.a)
    elif e.kind == NOT:
        _same_position_calls(g, e.a, nullable, out, seen)
    elif e.kind == SEQ:
        _same_position_calls(g, e.a, nullable, out, seen)
        if e.a in nullable:
            _same_position_calls(g, e.b, nullable, out, seen)
    elif e.kind == ALT:
        _same_position_calls(g, e.a, nullable, out, seen)
        _same_position_calls(g, e.b, nullable, out, seen)


def check_well_formed(g: Grammar) -> WellFormednessReport:
    if not g.is_core():
        g = desugar(g)
    nullable = nullable_nodes(g)
    graph = nx.DiGraph()
    graph.add_nodes_from(g.rules)
    for name, body in g.rules.items():
        calls: set[str] = set()
        _same_position_calls(g, body, nullable, calls, set())
        graph.add_edges_from((name, callee) for callee in calls)
    order = {name: i for i, name in enumerate(g.rules)}
    cycles = []
    for comp in nx.strongly_connected_components(graph):
        if len(comp) == 1:
            (name,) = comp
            if graph.has_edge(name, name):
                cycles.append([name])
            continue
        first = min(comp, key=order.__getitem__)
        edges = nx.find_cycle(graph.subgraph(comp), source=first)
        cycles.append([u for u, _ in edges])
    cycles.sort(key=lambda c: order[c[0]])
    nullable_names = {name for name, body in g.rules.items() if body in nullable}
    return WellFormednessReport(not cycles, cycles, nullable_names)
