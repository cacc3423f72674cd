"""Backtracking-generation sets and sparse generation maps.

A GenSet is a frozenset of ints.  A GenMap is a tuple of (child_gen,
parent_gen) pairs sorted by child_gen; only child generations that can
still be selected are kept.
"""

from __future__ import annotations

from typing import Iterable

GenSet = frozenset
GenMap = tuple

EMPTY_SET: frozenset = frozenset()
ZERO_SET = frozenset((0,))
ZERO_MAP: tuple = ((0, 0),)


class InvariantViolation(AssertionError):
    """Internal consistency failure in the derivative engine (a bug, not bad input)."""


def genmap(pairs: Iterable[tuple[int, int]]) -> tuple:
    out = tuple(sorted(pairs))
    keys = [k for k, _ in out]
    vals = [v for _, v in out]
    if len(set(keys)) != len(keys) or len(set(vals)) != len(vals):
        raise InvariantViolation(f"generation map is not an injective function: {out}")
    return out


def identity(gens: Iterable[int]) -> tuple:
    return tuple((g, g) for g in sorted(gens))


def compose(f: tuple, gs: Iterable[int]) -> frozenset:
    """Image of the set ``gs`` under ``f``."""
    if not gs:
        return EMPTY_SET
    if f == ZERO_MAP and len(gs) == 1 and 0 in gs:
        return ZERO_SET
    table = dict(f)
    try:
        return frozenset([table[g] for g in gs])
    except KeyError as exc:
        raise InvariantViolation(f"generation {exc.args[0]} missing from map {f}") from None


def up(p: tuple, old_max: int, new_max: int, m: int) -> tuple:
    """Map the child's newly created generation (if any) to ``m + 1``."""
    if new_max > old_max:
        return p + ((new_max, m + 1),)
    return p


def restrict(p: tuple, live: frozenset) -> tuple:
    """Drop entries whose child generation is no longer live."""
    out = tuple(kv for kv in p if kv[0] in live)
    if len(out) != len(live):
        have = {k for k, _ in out}
        missing = sorted(g for g in live if g not in have)
        raise InvariantViolation(f"live generations {missing} missing from map {p}")
    return out


def new_gens(back: frozenset, m: int) -> tuple:
    """Map a fresh child's own generations into a parent whose newest is ``m``.

    Gen 0 stays 0; every positive generation of the child denotes the
    position where it starts, which the parent labels ``m + 1``.
    """
    out = [(0, 0)]
    out.extend((g, m + 1) for g in sorted(back) if g > 0)
    return tuple(out)


def ngs(back: frozenset, m: int) -> tuple:
    """New-generation map for a child with the given back set."""
    if back and max(back) > 0:
        return ((0, 0), (1, m + 1))
    return ZERO_MAP


def max_value(p: tuple) -> int:
    return max((v for _, v in p), default=0)


def is_identity(p: tuple) -> bool:
    return all(k == v for k, v in p)
