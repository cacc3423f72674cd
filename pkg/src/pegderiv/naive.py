"""Plain recursive-descent recognizer with no memoization.

This is the reference oracle and the exponential baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import kernels
from .grammar import Grammar, GrammarError, check_well_formed, desugar

MATCH = "match"
FAIL = "fail"


class ResourceExhausted(RuntimeError):
    """The invocation or depth budget ran out; no verdict was reached."""

    def __init__(self, stats: "NaiveStats"):
        super().__init__(
            f"budget exhausted after {stats.nonterminal_invocations} invocations "
            f"(depth {stats.max_recursion_depth})"
        )
        self.stats = stats


@dataclass
class Limits:
    max_invocations: int = 50_000_000
    max_depth: int = 100_000


@dataclass
class NaiveStats:
    nonterminal_invocations: int = 0
    max_recursion_depth: int = 0
    step_limit_hit: bool = False


@dataclass(frozen=True)
class Outcome:
    status: str
    next_pos: int

    @property
    def matched(self) -> bool:
        return self.status == MATCH


_prepared: dict[int, tuple[Grammar, Grammar]] = {}


def prepare(g: Grammar, require_well_formed: bool = True) -> Grammar:
    """Desugar if needed and enforce the well-formedness gate."""
    hit = _prepared.get(id(g))
    if hit is not None and hit[0] is g:
        return hit[1]
    core = g if g.is_core() else desugar(g)
    if require_well_formed:
        report = check_well_formed(core)
        if not report.well_formed:
            raise GrammarError(f"grammar is not well-formed: {report.describe()}")
        if len(_prepared) > 256:
            _prepared.clear()
        _prepared[id(g)] = (g, core)
    return core


def match_naive(
    g: Grammar,
    e: int,
    data: bytes,
    pos: int = 0,
    limits: Limits | None = None,
    stats: NaiveStats | None = None,
    observer: Optional[Callable[[int, int, int], None]] = None,
    pure: bool = False,
) -> Outcome:
    """Evaluate node ``e`` of a core grammar at ``pos``.

    ``observer(node, pos, end)`` is called after every sub-evaluation with
    end == -1 on failure; supplying it forces the pure-Python kernel.
    """
    limits = limits or Limits()
    stats = stats if stats is not None else NaiveStats()
    if not 0 <= pos <= len(data):
        raise ValueError("position outside input")
    prog = kernels.compile_program(g)
    mod = kernels.backend_module(pure or observer is not None)
    data = bytes(data)
    try:
        end, invocations, deepest, hit = kernels.run_deep(
            mod.naive_run,
            prog.kinds, prog.a1, prog.a2, prog.bodies, data, e, pos,
            limits.max_invocations, limits.max_depth, observer,
            work_hint=len(data) - pos,
        )
    except RecursionError:
        stats.step_limit_hit = True
        raise ResourceExhausted(stats) from None
    stats.nonterminal_invocations += invocations
    stats.max_recursion_depth = max(stats.max_recursion_depth, deepest)
    if hit:
        stats.step_limit_hit = True
        raise ResourceExhausted(stats)
    if end == kernels.FAIL:
        return Outcome(FAIL, pos)
    return Outcome(MATCH, end)


def recognize_naive(
    g: Grammar, data: bytes, limits: Limits | None = None, pure: bool = False
) -> tuple[str, int, NaiveStats]:
    """Run the start expression at position 0; consumed is 0 on failure."""
    g = prepare(g)
    stats = NaiveStats()
    out = match_naive(g, g.start, data, 0, limits, stats, pure=pure)
    return out.status, out.next_pos if out.matched else 0, stats
