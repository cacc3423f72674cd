"""Pure-Python recognizer kernels over a compiled flat program.

Mirrors ``_kernels.pyx`` call for call; used when the extension is not
built or when ``PEGDERIV_PURE=1``.
"""

K_CHAR, K_EMPTY, K_NT, K_NOT, K_SEQ, K_ALT, K_ANY = range(7)

FAIL = -1
EXHAUSTED = -2
_UNKNOWN = -2
_RUNNING = -3


class _Exhausted(Exception):
    pass


class LeftRecursionDetected(RuntimeError):
    pass


def naive_run(kinds, a1, a2, bodies, data, node, pos, max_invocations, max_depth, observer=None):
    """Return (end, invocations, max_depth_seen, limit_hit); end is FAIL or EXHAUSTED on failure."""
    n = len(data)
    invocations = 0
    deepest = 0

    def ev(e, p, d):
        nonlocal invocations, deepest
        if d > deepest:
            deepest = d
            if d > max_depth:
                raise _Exhausted
        k = kinds[e]
        if k == K_CHAR:
            r = p + 1 if p < n and data[p] == a1[e] else FAIL
        elif k == K_EMPTY:
            r = p
        elif k == K_ANY:
            r = p + 1 if p < n else FAIL
        elif k == K_NT:
            invocations += 1
            if invocations > max_invocations:
                raise _Exhausted
            r = ev(bodies[a1[e]], p, d + 1)
        elif k == K_NOT:
            r = p if ev(a1[e], p, d + 1) == FAIL else FAIL
        elif k == K_SEQ:
            r = ev(a1[e], p, d + 1)
            if r != FAIL:
                r = ev(a2[e], r, d + 1)
        else:
            r = ev(a1[e], p, d + 1)
            if r == FAIL:
                r = ev(a2[e], p, d + 1)
        if observer is not None:
            observer(e, p, r)
        return r

    try:
        end = ev(node, pos, 1)
    except _Exhausted:
        return EXHAUSTED, invocations, deepest, True
    return end, invocations, deepest, False


def packrat_run(kinds, a1, a2, bodies, data, node, nrules, dense, trace=None):
    """Return (end, evaluations, hits, entries).

    Memo slots hold the end position or FAIL.  ``trace`` receives
    ("hit" | "store", rule, pos, end) events.
    """
    n = len(data)
    width = n + 1
    memo = [_UNKNOWN] * (nrules * width) if dense else {}
    evaluations = 0
    hits = 0

    def ev(e, p):
        nonlocal evaluations, hits
        k = kinds[e]
        if k == K_CHAR:
            return p + 1 if p < n and data[p] == a1[e] else FAIL
        if k == K_EMPTY:
            return p
        if k == K_ANY:
            return p + 1 if p < n else FAIL
        if k == K_NT:
            rule = a1[e]
            slot = rule * width + p
            cached = memo[slot] if dense else memo.get(slot, _UNKNOWN)
            if cached == _RUNNING:
                raise LeftRecursionDetected(rule)
            if cached != _UNKNOWN:
                hits += 1
                if trace is not None:
                    trace("hit", rule, p, cached)
                return cached
            evaluations += 1
            memo[slot] = _RUNNING
            r = ev(bodies[rule], p)
            memo[slot] = r
            if trace is not None:
                trace("store", rule, p, r)
            return r
        if k == K_NOT:
            return p if ev(a1[e], p) == FAIL else FAIL
        if k == K_SEQ:
            r = ev(a1[e], p)
            return r if r == FAIL else ev(a2[e], r)
        r = ev(a1[e], p)
        return ev(a2[e], p) if r == FAIL else r

    end = ev(node, 0)
    entries = evaluations  # one stored slot per evaluation
    return end, evaluations, hits, entries
