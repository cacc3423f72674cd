"""Derivative-based PEG recognition.

The grammar is elaborated once into annotated nodes (``inject``); each
input byte, then the end marker, replaces the current expression by its
derivative.  Derived nodes live in a per-step table that is dropped when
the next step starts.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from . import dnodes as dn
from .dnodes import (
    EMPTY,
    FAIL,
    INF,
    K_ALT,
    K_ANY,
    K_CHAR,
    K_EMPTY,
    K_FAIL,
    K_INF,
    K_LOOK,
    K_MAP,
    K_NOT,
    K_NT,
    K_SEQ,
    DNode,
    NodeFactory,
    count_nodes,
    reachable,
)
from .gens import EMPTY_SET, ZERO_MAP, ZERO_SET, InvariantViolation, compose, max_value, new_gens, restrict, up
from .grammar import ALT, ANY, CHAR, EMPTY as G_EMPTY, NOT, NT, SEQ, Grammar, desugar

END = -1  # the end-of-input marker; never a byte
MATCH = "match"
FAIL_VERDICT = "fail"
_MAX_ROUNDS = 64


@dataclass
class StepMetrics:
    position: int
    symbol: object  # byte value or "$"
    nodes_before: int
    nodes_after: int
    unique_subexpressions: int
    max_generation: int
    live_generations: int
    compactions_fired: int
    elapsed: float

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# grammar elaboration


class Injected:
    """A grammar elaborated into annotated nodes, shared by all sessions."""

    def __init__(self, g: Grammar, fuse_maps: bool = True):
        if not g.is_core():
            g = desugar(g)
        self.grammar = g
        rules = list(g.rules)
        back = {name: ZERO_SET for name in rules}
        match = {name: EMPTY_SET for name in rules}
        nm = {name: 0 for name in rules}
        for _ in range(_MAX_ROUNDS):
            fac = NodeFactory(fuse_maps=fuse_maps)
            fac.nt_info = {name: (back[name], match[name], nm[name]) for name in rules}
            memo: dict[int, DNode] = {}
            bodies = {name: _inject(g, g.rules[name], fac, memo) for name in rules}
            root = _inject(g, g.start, fac, memo)
            changed = False
            for name, body in bodies.items():
                nb = back[name] | body.back
                nn = max(nm[name], body.nm, max(nb))
                if nb != back[name] or body.match != match[name] or nn != nm[name]:
                    back[name], match[name], nm[name] = nb, body.match, nn
                    changed = True
            if not changed:
                break
        else:
            raise InvariantViolation("static generation analysis did not converge")
        self.factory_template = fac
        self.root = root
        self.bodies = bodies
        self.body_sizes = {name: count_nodes(body) for name, body in bodies.items()}
        self.growth_budget = sum(self.body_sizes.values())

    def new_factory(self) -> NodeFactory:
        fac = NodeFactory(fuse_maps=self.factory_template.fuse_maps)
        fac.static_index = self.factory_template.static_index
        fac.nt_info = self.factory_template.nt_info
        fac.static = False
        return fac


def _inject(g: Grammar, nid: int, fac: NodeFactory, memo: dict[int, DNode]) -> DNode:
    done = memo.get(nid)
    if done is not None:
        return done
    e = g.store[nid]
    k = e.kind
    if k == CHAR:
        n = dn.char(e.a)
    elif k == ANY:
        n = dn.ANY
    elif k == G_EMPTY:
        n = EMPTY
    elif k == NT:
        n = fac.nt(e.a)
    elif k == NOT:
        n = fac.not_(_inject(g, e.a, fac, memo))
    elif k == ALT:
        n = fac.static_alt(_inject(g, e.a, fac, memo), _inject(g, e.b, fac, memo))
    elif k == SEQ:
        n = fac.static_seq(_inject(g, e.a, fac, memo), _inject(g, e.b, fac, memo))
    else:  # pragma: no cover
        raise InvariantViolation(f"unexpected grammar node {k}")
    memo[nid] = n
    return n


_injected_cache: dict[int, tuple[Grammar, Injected]] = {}


def inject(g: Grammar) -> Injected:
    hit = _injected_cache.get(id(g))
    if hit is not None and hit[0] is g:
        return hit[1]
    inj = Injected(g)
    if len(_injected_cache) > 64:
        _injected_cache.clear()
    _injected_cache[id(g)] = (g, inj)
    return inj


# ---------------------------------------------------------------------------
# back / match


def back(n: DNode) -> frozenset:
    return n.back


def match_set(n: DNode) -> frozenset:
    return n.match


# ---------------------------------------------------------------------------
# derivative


class StepMemo:
    """Per-step derivative cache plus counters."""

    def __init__(self, inj: Injected, c: int):
        self.inj = inj
        self.c = c
        self.cache: dict[int, DNode] = {}
        self.derivations = 0
        self.factory = inj.new_factory()
        self.factory.begin_step()


def _move(old: DNode, new: DNode, P: tuple, m: int) -> tuple:
    """Carry a child's map across its derivative."""
    if new.kind == K_FAIL or new.kind == K_INF:
        return ZERO_MAP
    return restrict(up(P, old.nm, new.nm, m), new.back)


def _fresh_map(fresh: DNode, m: int) -> tuple:
    if fresh.kind == K_FAIL or fresh.kind == K_INF:
        return ZERO_MAP
    return restrict(new_gens(fresh.back, m), fresh.back)


def derive(n: DNode, c: int, memo: StepMemo) -> DNode:
    """Derivative of ``n`` by byte ``c`` (or END), memoized for the step."""
    cache = memo.cache
    r = cache.get(n.uid)
    if r is not None:
        return r
    k = n.kind
    if k == K_CHAR:
        r = EMPTY if c == n.a else FAIL
    elif k == K_ANY:
        r = EMPTY if c != END else FAIL
    elif k == K_EMPTY:
        r = EMPTY if c == END else FAIL
    elif k in (K_LOOK, K_FAIL, K_INF):
        r = n
    else:
        memo.derivations += 1
        fac = memo.factory
        if k == K_NT:
            cache[n.uid] = INF  # a same-position re-entry is left recursion
            body = memo.inj.bodies[n.a]
            r = derive(body, c, memo)
            if body.nm < n.nm and r.nm > body.nm:
                # renumber the body's new generation past the rule's own range
                A = tuple((g, g) for g in sorted(r.back) if g <= body.nm)
                A = A + tuple((g, n.nm + 1) for g in sorted(r.back) if g > body.nm)
                r = fac.map_(r, A, n.nm + 1)
        elif k == K_NOT:
            r = fac.not_(derive(n.a, c, memo))
        elif k == K_MAP:
            a2 = derive(n.a, c, memo)
            A = _move(n.a, a2, n.A, n.m)
            r = fac.map_(a2, A, max(n.m, max_value(A)))
        elif k == K_ALT:
            a2 = derive(n.a, c, memo)
            b2 = derive(n.b, c, memo)
            A = _move(n.a, a2, n.A, n.m)
            B = _move(n.b, b2, n.B, n.m)
            r = fac.alt(a2, b2, A, B, max(n.m, max_value(A), max_value(B)))
        else:
            r = _derive_seq(n, c, memo)
    cache[n.uid] = r
    return r


def _derive_seq(n: DNode, c: int, memo: StepMemo) -> DNode:
    fac = memo.factory
    m = n.m
    a = n.a
    a2 = derive(a, c, memo)
    if a2.kind == K_INF:
        return INF
    fresh = n.b
    if c == END and (a2.kind == K_EMPTY or 0 in a2.match or a2.nm > a.nm):
        # the right side starts at the end of input; only derive it when the
        # left side can end there, since a speculative derivative would
        # trip the left-recursion guard of rules still in progress
        fresh = derive(n.b, c, memo)
    if a2.kind == K_EMPTY:
        B = _fresh_map(fresh, m)
        return fac.map_(fresh, B, max(m, max_value(B)))

    vals = [m]
    live = a2.back
    fol = []
    for g, bi, Bi, li in n.fol:
        if g not in live:
            continue
        bi2 = derive(bi, c, memo)
        Bi2 = _move(bi, bi2, Bi, m)
        li2 = m + 1 if 0 in bi2.match else li
        if bi2.kind == K_FAIL and li2 == 0:
            continue
        fol.append((g, bi2, Bi2, li2))
        vals.append(max_value(Bi2))
        vals.append(li2)
    if a2.nm > a.nm and a2.nm in live:
        l_new = m + 1 if 0 in fresh.match else 0
        if not (fresh.kind == K_FAIL and l_new == 0):
            B = _fresh_map(fresh, m)
            fol.append((a2.nm, fresh, B, l_new))
            vals.append(max_value(B))
            vals.append(l_new)

    if 0 in a2.match:
        bz = fresh
        Bz = _fresh_map(fresh, m)
        lz = m + 1 if 0 in fresh.match else 0
    elif a2.match:
        bz, Bz, lz = FAIL, ZERO_MAP, 0
    elif n.bz.kind == K_FAIL and n.lz == 0:
        bz, Bz, lz = FAIL, ZERO_MAP, 0
    else:
        bz = derive(n.bz, c, memo)
        Bz = _move(n.bz, bz, n.Bz, m)
        lz = m + 1 if 0 in bz.match else n.lz
    if bz.kind == K_FAIL and lz == 0:
        Bz = ZERO_MAP
    vals.append(max_value(Bz))
    vals.append(lz)
    m2 = max(vals)

    k2 = a2.kind
    if k2 == K_LOOK:
        for g, bi, Bi, li in fol:
            if g == a2.a:
                return fac.select(bi, Bi, li, a2, m2)
        return FAIL
    if k2 == K_FAIL:
        if bz.kind == K_FAIL and lz == 0:
            return FAIL
        return fac.select(bz, Bz, lz, dn.look(1), m2)
    return fac.raw_seq(a2, n.b, tuple(fol), bz, Bz, lz, m2)


# ---------------------------------------------------------------------------
# metrics


def max_generation(root: DNode) -> int:
    return root.nm


def metrics_snapshot(root: DNode) -> dict:
    nodes = reachable(root)
    return {
        "unique_subexpressions": len(nodes),
        "total_size": sum(node_size(x) for x in nodes),
        "max_generation": root.nm,
        "live_generations": len(root.back),
    }


def node_size(n: DNode) -> int:
    """Storage size of one node: constant for atoms and negation, map
    entries for map/alternation, followers times entries for sequences."""
    k = n.kind
    if k == K_MAP:
        return 1 + len(n.A)
    if k == K_ALT:
        return 1 + len(n.A) + len(n.B)
    if k == K_SEQ:
        return 1 + len(n.Bz) + sum(1 + len(f[2]) for f in n.fol)
    return 1


# ---------------------------------------------------------------------------
# sessions


class DerivativeSession:
    """Incremental recognizer: ``feed`` bytes, then ``finish``.

    ``verdict`` becomes "match" or "fail" as soon as it is decided; later
    input is then ignored.  Sessions are cheap to fork with ``fork``.
    """

    def __init__(self, inj: Injected, record_metrics: bool = True, check: bool = False):
        self.inj = inj
        self.root = inj.root
        self.position = 0
        self.steps = 0
        self.record_metrics = record_metrics
        self.check = check
        self.metrics: list[StepMetrics] = []
        self.verdict: Optional[str] = None
        self.finished = False
        self._size = count_nodes(self.root) if record_metrics else 0
        self._decide()

    def fork(self) -> "DerivativeSession":
        other = object.__new__(DerivativeSession)
        other.__dict__.update(self.__dict__)
        other.metrics = list(self.metrics)
        return other

    def _decide(self) -> None:
        if self.verdict is not None:
            return
        if self.root.match:
            self.verdict = MATCH
        elif self.root.kind == K_FAIL or self.root.kind == K_INF:
            self.verdict = FAIL_VERDICT
        elif self.finished:
            self.verdict = FAIL_VERDICT

    def _step(self, c: int) -> None:
        t0 = time.perf_counter()
        memo = StepMemo(self.inj, c)
        new_root = derive(self.root, c, memo)
        elapsed = time.perf_counter() - t0
        if self.check:
            _check_invariants(new_root)
        if self.record_metrics:
            before = self._size
            after = count_nodes(new_root)
            self.metrics.append(
                StepMetrics(
                    position=self.position,
                    symbol="$" if c == END else c,
                    nodes_before=before,
                    nodes_after=after,
                    unique_subexpressions=after,
                    max_generation=new_root.nm,
                    live_generations=len(new_root.back),
                    compactions_fired=memo.factory.compactions,
                    elapsed=elapsed,
                )
            )
            self._size = after
        self.root = new_root
        self.steps += 1

    def feed(self, data: Iterable[int] | bytes) -> Optional[str]:
        if self.finished:
            raise RuntimeError("session already finished")
        for c in data:
            if self.verdict is not None:
                break
            self._step(c)
            self.position += 1
            self._decide()
        return self.verdict

    def finish(self) -> str:
        if not self.finished:
            if self.verdict is None:
                self._step(END)
            self.finished = True
            self._decide()
        return self.verdict


def _check_invariants(root: DNode) -> None:
    for x in reachable(root):
        if not x.match <= x.back:
            raise InvariantViolation(f"match not within back at {dn.show(x)}")
        if x.kind == K_LOOK and x.a == 0:
            raise InvariantViolation("gen-0 lookahead survived compaction")
        if x.kind == K_MAP and all(k == v for k, v in x.A):
            raise InvariantViolation(f"identity map survived compaction at {dn.show(x)}")
        if x.kind in (K_MAP, K_ALT, K_SEQ):
            vals = set(x.back)
            for P in (x.A, x.B, x.Bz):
                if P:
                    vals.update(v for _, v in P)
            for f in x.fol:
                vals.update(v for _, v in f[2])
                vals.add(f[3])
            vals.add(x.lz or 0)
            if max(vals) > x.m:
                raise InvariantViolation(f"generation above m at {dn.show(x)}")


def new_session(g: Grammar, record_metrics: bool = True, check: bool = False) -> DerivativeSession:
    return DerivativeSession(inject(g), record_metrics=record_metrics, check=check)


def parse_derivative(g: Grammar, data: bytes, record_metrics: bool = True, check: bool = False):
    """Recognize ``data``; returns (verdict, per-step metrics)."""
    s = new_session(g, record_metrics=record_metrics, check=check)
    s.feed(data)
    s.finish()
    return s.verdict, s.metrics


def recognize_derivative(g: Grammar, data: bytes) -> str:
    return parse_derivative(g, data, record_metrics=False)[0]
