"""Property tests over random inputs and grammars."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from nodegen import random_raw_node
from pegderiv import dnodes as dn
from pegderiv.corpus import ANBNCN_GRAMMAR, EXP_GRAMMAR, STATEMENTS_GRAMMAR
from pegderiv.derivative import inject, parse_derivative
from pegderiv.grammar import desugar, parse_grammar
from pegderiv.harness import GrammarGenConfig, gen_grammar
from pegderiv.naive import recognize_naive
from pegderiv.packrat import recognize_packrat

CORE = [desugar(parse_grammar(src)) for src in (EXP_GRAMMAR, ANBNCN_GRAMMAR, STATEMENTS_GRAMMAR)]

words = st.binary(max_size=24).map(lambda b: bytes(b"abc"[x % 3] for x in b))


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(range(len(CORE))), words)
def test_engines_agree_on_corpus(i, data):
    g = CORE[i]
    n_verdict, n_len, _ = recognize_naive(g, data)
    p_verdict, p_len, _ = recognize_packrat(g, data)
    d_verdict, _ = parse_derivative(g, data, record_metrics=False, check=True)
    assert n_verdict == p_verdict == d_verdict
    assert n_len == p_len


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), words)
def test_engines_agree_on_random_grammars(seed, data):
    g = desugar(gen_grammar(GrammarGenConfig(seed=seed, sugar_enabled=seed % 2 == 1)))
    d_verdict, metrics = parse_derivative(g, data, check=True)
    assert recognize_packrat(g, data)[0] == d_verdict
    budget = inject(g).growth_budget
    prev = inject(g).root.nm
    for m in metrics:
        assert m.nodes_after - m.nodes_before <= budget
        assert m.max_generation <= prev + 1
        prev = m.max_generation


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_compaction_never_grows(seed):
    fac = dn.NodeFactory()
    fac.begin_step()
    top = random_raw_node(random.Random(seed), fac)
    out = dn.compact(top, fac)
    assert dn.count_nodes(out) <= dn.count_nodes(top)
    for x in dn.reachable(out):
        assert not (x.kind == dn.K_LOOK and x.a == 0)
        assert x.match <= x.back


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_desugar_idempotent_on_random_grammars(seed):
    g = gen_grammar(GrammarGenConfig(seed=seed, sugar_enabled=True))
    once = desugar(g)
    assert desugar(once).canonical() == once.canonical()
