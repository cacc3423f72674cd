import pytest

from pegderiv.grammar import (
    ALT,
    ANY,
    CHAR,
    EMPTY,
    NOT,
    NT,
    SEQ,
    Expr,
    GrammarSyntaxError,
    NodeStore,
    check_well_formed,
    desugar,
    intern,
    parse_grammar,
)
from pegderiv.corpus import EXP_GRAMMAR


def test_minimal_grammar():
    g = parse_grammar("S <- 'a'")
    assert list(g.rules) == ["S"]
    assert g.start_rule == "S"
    assert g.node(g.body("S")) == Expr(CHAR, ord("a"))


def test_exp_grammar_shape():
    g = parse_grammar(EXP_GRAMMAR)
    assert list(g.rules) == ["S", "A"]
    assert g.to_source() == "S <- A !.\nA <- 'a' A 'b' / 'a' A 'c' / ''\n"
    assert g.is_core()


def test_first_rule_is_start():
    g = parse_grammar("B <- 'b'\nA <- B")
    assert g.start_rule == "B"


@pytest.mark.parametrize(
    "src, line, col, needle",
    [
        ("S <- A\n", 1, 6, "undefined nonterminal A"),
        ("A <- 'a'\nA <- 'b'", 2, 1, "duplicate rule A"),
        ("A 'x'", 1, 3, "expected '<-'"),
        ("", 1, 1, "no rules"),
        ("A <- 'a", 1, 6, "unexpected character"),
        ("A <- (", 1, 7, "empty sequence"),
    ],
)
def test_syntax_errors(src, line, col, needle):
    with pytest.raises(GrammarSyntaxError) as info:
        parse_grammar(src)
    err = info.value
    assert (err.line, err.column) == (line, col)
    assert needle in str(err)
    assert str(err).startswith(f"{line}:{col}:")


def test_comments_strings_classes():
    g = parse_grammar("# leading\nS <- 'ab' [x-z] . # trailing\n")
    core = desugar(g)
    assert core.to_source() == "S <- ('a' 'b') ('x' / 'y' / 'z') .\n"


def test_escapes():
    g = parse_grammar(r"S <- '\n' '\x41' '\''")
    e = g.node(g.body("S"))
    assert e.kind == SEQ
    bytes_seen = []
    stack = [g.body("S")]
    while stack:
        x = g.node(stack.pop())
        if x.kind == SEQ:
            stack += [x.b, x.a]
        else:
            bytes_seen.append(x.a)
    assert bytes_seen == [10, 0x41, ord("'")]


def test_bytes_input_is_utf8():
    g = parse_grammar("S <- 'é'".encode("utf-8"))
    core = desugar(g)
    assert core.to_source() == "S <- '\\xc3' '\\xa9'\n"


def test_star_becomes_fresh_rule():
    core = desugar(parse_grammar("S <- 'a'*"))
    assert core.to_source() == "S <- %rep0\n%rep0 <- 'a' %rep0 / ''\n"


def test_repeated_body_shares_rule():
    core = desugar(parse_grammar("S <- ('a' / 'b')* 'c' ('a' / 'b')*"))
    assert core.to_source() == "S <- %rep0 'c' %rep0\n%rep0 <- ('a' / 'b') %rep0 / ''\n"


def test_and_opt_plus():
    core = desugar(parse_grammar("S <- &'a' 'b'? 'c'+"))
    assert core.to_source() == "S <- !(!'a') ('b' / '') 'c' %rep0\n%rep0 <- 'c' %rep0 / ''\n"


def test_empty_class_never_matches():
    core = desugar(parse_grammar("S <- []"))
    assert core.to_source() == "S <- !''\n"


def test_any_stays_core():
    core = desugar(parse_grammar("S <- ."))
    assert core.node(core.body("S")).kind == ANY


def test_desugar_idempotent():
    g = parse_grammar("S <- 'a'* B\nB <- ('a'/'b')* ('a'/'b')* &'c' 'd'? [xa-c]\n")
    once = desugar(g)
    assert desugar(once).canonical() == once.canonical()
    assert desugar(once).to_source() == once.to_source()


def test_fresh_rule_count_matches_distinct_bodies():
    g = parse_grammar("S <- 'a'* B 'a'* ('a' 'b')+\nB <- ('a' 'b')* 'b'*\n")
    core = desugar(g)
    fresh = [n for n in core.rules if n.startswith("%rep")]
    # bodies: 'a', 'a' 'b', 'b'
    assert len(fresh) == 3
    assert core.is_core()


def test_intern_examples():
    store = NodeStore()
    a = intern(Expr(CHAR, ord("a")), store)
    assert intern(Expr(CHAR, ord("a")), store) == a
    b = store.char(ord("b"))
    xy = intern(Expr(SEQ, a, b), store)
    assert intern(Expr(SEQ, a, b), store) == xy
    assert intern(Expr(SEQ, b, a), store) != xy


def test_interned_nodes_are_distinct():
    g = desugar(parse_grammar("S <- ('a' 'b' / 'a' 'b') 'a' 'b' !('a' 'b')"))
    nodes = list(g.store)
    assert len(nodes) == len(set(nodes))


def test_store_kinds():
    store = NodeStore()
    assert store[store.empty()].kind == EMPTY
    assert store[store.nt("X")].kind == NT
    assert store[store.not_(store.any())].kind == NOT
    assert store[store.alt(store.empty(), store.any())].kind == ALT


@pytest.mark.parametrize(
    "src, ok, cycles",
    [
        ("A <- A", False, [["A"]]),
        ("A <- 'a' A / ''", True, []),
        ("A <- '' A", False, [["A"]]),
        ("A <- B\nB <- !'' A", False, [["A", "B"]]),
        ("A <- &A 'x'", False, [["A"]]),
        ("A <- ('')*", False, [["%rep0"]]),
        (EXP_GRAMMAR, True, []),
    ],
)
def test_well_formedness(src, ok, cycles):
    report = check_well_formed(desugar(parse_grammar(src)))
    assert report.well_formed is ok
    assert report.offending_cycles == cycles


def test_nullable_report():
    report = check_well_formed(desugar(parse_grammar("S <- A 'x'\nA <- 'a' A / ''")))
    assert report.nullable_nonterminals == {"A"}
