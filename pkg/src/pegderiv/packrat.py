"""Packrat recognizer: nonterminal results memoized per (rule, position)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import kernels
from .grammar import Grammar
from .naive import FAIL, MATCH, prepare

DENSE_SLOT_LIMIT = 10_000_000


@dataclass
class PackratStats:
    evaluations: int = 0
    hits: int = 0
    misses: int = 0
    memo_entries: int = 0
    dense: bool = True


def recognize_packrat(
    g: Grammar,
    data: bytes,
    trace: Optional[Callable[[str, str, int, int], None]] = None,
    pure: bool = False,
) -> tuple[str, int, PackratStats]:
    """Return (verdict, consumed, stats).

    ``trace(event, rule_name, pos, end)`` sees every memo hit and store;
    end is -1 for a memoized failure.
    """
    g = prepare(g)
    prog = kernels.compile_program(g)
    data = bytes(data)
    nrules = len(prog.rule_names)
    dense = nrules * (len(data) + 1) <= DENSE_SLOT_LIMIT
    use_pure = pure or trace is not None or not dense
    mod = kernels.backend_module(use_pure)
    hook = None
    if trace is not None:
        names = prog.rule_names

        def hook(event, rule, pos, end):
            trace(event, names[rule], pos, end)

    end, evaluations, hits, entries = kernels.run_deep(
        mod.packrat_run,
        prog.kinds, prog.a1, prog.a2, prog.bodies, data, g.start, nrules, dense, hook,
        work_hint=len(data),
    )
    stats = PackratStats(evaluations, hits, evaluations, entries, dense)
    if end == kernels.FAIL:
        return FAIL, 0, stats
    return MATCH, end, stats
