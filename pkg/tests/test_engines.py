"""Naive and packrat recognizers."""

import os
import subprocess
import sys

import pytest

from pegderiv import kernels
from pegderiv.corpus import EXP_GRAMMAR, exp_input
from pegderiv.grammar import GrammarError, desugar, parse_grammar
from pegderiv.naive import FAIL, MATCH, Limits, NaiveStats, ResourceExhausted, match_naive, recognize_naive
from pegderiv import packrat
from pegderiv.packrat import recognize_packrat

BOTH = [False, True] if kernels.BACKEND == "compiled" else [True]


@pytest.fixture(scope="module")
def g1():
    return parse_grammar(EXP_GRAMMAR)


@pytest.mark.parametrize("pure", BOTH)
def test_naive_examples(g1, pure):
    g = parse_grammar("S <- 'a'")
    out = match_naive(g, g.start, b"a", 0, pure=pure)
    assert (out.status, out.next_pos) == (MATCH, 1)
    out = match_naive(g1, g1.start, b"aacc", 0, pure=pure)
    assert (out.status, out.next_pos) == (MATCH, 4)
    assert recognize_naive(g1, b"", pure=pure)[:2] == (MATCH, 0)
    assert recognize_naive(g1, b"ab", pure=pure)[:2] == (MATCH, 2)
    assert recognize_naive(g1, b"aX", pure=pure)[:2] == (FAIL, 0)


def test_ordered_choice_is_not_commutative():
    long_first = parse_grammar("S <- 'a' 'b' / 'a'")
    short_first = parse_grammar("S <- 'a' / 'a' 'b'")
    assert recognize_naive(long_first, b"ab")[:2] == (MATCH, 2)
    assert recognize_naive(short_first, b"ab")[:2] == (MATCH, 1)
    assert recognize_packrat(long_first, b"ab")[:2] == (MATCH, 2)
    assert recognize_packrat(short_first, b"ab")[:2] == (MATCH, 1)


def test_fail_purity(g1):
    core = desugar(parse_grammar("S <- ('a' 'b' / 'a' 'c') !'x' / 'a'*\n"))
    data = b"aacbax"
    for e in range(len(core.store)):
        for pos in range(len(data) + 1):
            out = match_naive(core, e, data, pos)
            if out.status == FAIL:
                assert out.next_pos == pos


def test_alternation_commitment():
    g = parse_grammar("S <- 'a' / X\nX <- 'b'")
    x_node = g.store.nt("X")
    seen = []
    match_naive(g, g.start, b"a", 0, observer=lambda e, p, r: seen.append(e))
    assert seen and x_node not in seen
    seen.clear()
    match_naive(g, g.start, b"b", 0, observer=lambda e, p, r: seen.append(e))
    assert x_node in seen


def test_observer_failures_report_no_position():
    g = parse_grammar(EXP_GRAMMAR)
    events = []
    match_naive(g, g.start, b"aacb", 0, observer=lambda e, p, r: events.append((e, p, r)))
    assert all(r == -1 or r >= p for _, p, r in events)


def test_naive_rejects_ill_formed():
    with pytest.raises(GrammarError):
        recognize_naive(parse_grammar("A <- A"), b"a")
    with pytest.raises(GrammarError):
        recognize_naive(parse_grammar("A <- '' A"), b"a")


def test_naive_budget():
    g = parse_grammar(EXP_GRAMMAR)
    with pytest.raises(ResourceExhausted) as info:
        recognize_naive(g, exp_input(12), Limits(max_invocations=1000, max_depth=100_000))
    assert info.value.stats.step_limit_hit
    with pytest.raises(ResourceExhausted):
        recognize_naive(g, b"a" * 50 + b"b" * 50, Limits(max_invocations=10**9, max_depth=10))


def test_naive_invocations_exact(g1):
    # two calls of A per level of nesting, plus the innermost
    for n in range(1, 10):
        _, _, stats = recognize_naive(g1, exp_input(n))
        assert stats.nonterminal_invocations == 2 ** (n + 1) - 1


def test_naive_exponential_growth(g1):
    counts = {n: recognize_naive(g1, exp_input(n))[2].nonterminal_invocations for n in range(6, 16)}
    for n in range(6, 15):
        assert counts[n + 1] / counts[n] >= 1.8


def test_stats_accumulate():
    g = parse_grammar(EXP_GRAMMAR)
    stats = NaiveStats()
    match_naive(g, g.start, b"ab", 0, stats=stats)
    first = stats.nonterminal_invocations
    match_naive(g, g.start, b"ab", 0, stats=stats)
    assert stats.nonterminal_invocations == 2 * first


@pytest.mark.parametrize("pure", BOTH)
def test_packrat_examples(g1, pure):
    verdict, consumed, stats = recognize_packrat(g1, b"aacc", pure=pure)
    assert (verdict, consumed) == (MATCH, 4)
    assert stats.memo_entries <= len(g1.rules) * (4 + 2)
    assert recognize_packrat(parse_grammar("S <- 'a'"), b"b", pure=pure)[:2] == (FAIL, 0)
    n = 12
    verdict, _, stats = recognize_packrat(g1, exp_input(n), pure=pure)
    assert verdict == MATCH
    assert stats.evaluations <= len(g1.rules) * (2 * n + 1)


def test_packrat_evaluates_each_slot_once(g1):
    stores = []
    hits = []

    def trace(event, rule, pos, end):
        (stores if event == "store" else hits).append((rule, pos))

    data = b"aaabcbccaaac"
    _, _, stats = recognize_packrat(g1, data, trace=trace)
    assert len(stores) == len(set(stores)) == stats.evaluations
    assert len(hits) == stats.hits
    assert stats.memo_entries <= len(g1.rules) * (len(data) + 1)


def test_packrat_sparse_table(g1, monkeypatch):
    monkeypatch.setattr(packrat, "DENSE_SLOT_LIMIT", 4)
    verdict, consumed, stats = recognize_packrat(g1, b"aacc")
    assert not stats.dense
    assert (verdict, consumed) == (MATCH, 4)


def test_deep_input_does_not_overflow():
    g = parse_grammar("S <- 'a' S / ''")
    data = b"a" * 20000
    assert recognize_packrat(g, data)[:2] == (MATCH, 20000)
    assert recognize_naive(g, data, Limits(max_invocations=10**7, max_depth=100_000))[:2] == (MATCH, 20000)


def test_pure_and_compiled_agree():
    if kernels.BACKEND != "compiled":
        pytest.skip("compiled kernels not built")
    g = parse_grammar("S <- (A / B)* !.\nA <- 'a' B? 'c'\nB <- 'b' A? / &'c' .")
    for data in [b"", b"ac", b"abc", b"abacc", b"bcc", b"abacbcc", b"b"]:
        assert recognize_naive(g, data) == recognize_naive(g, data, pure=True)
        assert recognize_packrat(g, data) == recognize_packrat(g, data, pure=True)


def test_pure_backend_forced_by_environment():
    env = dict(os.environ, PEGDERIV_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import pegderiv; print(pegderiv.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
