# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled recognizer kernels; same interface as _kernels_py."""

from libc.stdlib cimport malloc, free

cdef enum:
    K_CHAR = 0
    K_EMPTY = 1
    K_NT = 2
    K_NOT = 3
    K_SEQ = 4
    K_ALT = 5
    K_ANY = 6

cdef enum:
    C_FAIL = -1
    C_UNKNOWN = -2
    C_RUNNING = -3
    C_ABORT = -4

FAIL = -1
EXHAUSTED = -2


class LeftRecursionDetected(RuntimeError):
    pass


cdef struct Prog:
    const int *kinds
    const int *a1
    const int *a2
    const int *bodies
    const unsigned char *data
    Py_ssize_t n


cdef struct NaiveState:
    long long invocations
    long long max_invocations
    long deepest
    long max_depth


cdef long naive_ev(Prog *g, NaiveState *st, int e, long p, long d) nogil:
    cdef int k
    cdef long r
    if d > st.deepest:
        st.deepest = d
        if d > st.max_depth:
            return C_ABORT
    k = g.kinds[e]
    if k == K_CHAR:
        if p < g.n and g.data[p] == g.a1[e]:
            return p + 1
        return C_FAIL
    if k == K_EMPTY:
        return p
    if k == K_ANY:
        return p + 1 if p < g.n else C_FAIL
    if k == K_NT:
        st.invocations += 1
        if st.invocations > st.max_invocations:
            return C_ABORT
        return naive_ev(g, st, g.bodies[g.a1[e]], p, d + 1)
    if k == K_NOT:
        r = naive_ev(g, st, g.a1[e], p, d + 1)
        if r == C_ABORT:
            return r
        return p if r == C_FAIL else C_FAIL
    if k == K_SEQ:
        r = naive_ev(g, st, g.a1[e], p, d + 1)
        if r < 0:
            return r
        return naive_ev(g, st, g.a2[e], r, d + 1)
    r = naive_ev(g, st, g.a1[e], p, d + 1)
    if r == C_FAIL:
        return naive_ev(g, st, g.a2[e], p, d + 1)
    return r


def naive_run(const int[:] kinds, const int[:] a1, const int[:] a2, const int[:] bodies,
              const unsigned char[:] data, int node, long pos,
              long long max_invocations, long max_depth, observer=None):
    if observer is not None:
        raise ValueError("observer requires the pure-Python kernel")
    cdef Prog g
    cdef NaiveState st
    cdef long end
    g.kinds = &kinds[0]
    g.a1 = &a1[0]
    g.a2 = &a2[0]
    g.bodies = &bodies[0] if bodies.shape[0] else NULL
    g.data = &data[0] if data.shape[0] else NULL
    g.n = data.shape[0]
    st.invocations = 0
    st.max_invocations = max_invocations
    st.deepest = 0
    st.max_depth = max_depth
    with nogil:
        end = naive_ev(&g, &st, node, pos, 1)
    if end == C_ABORT:
        return EXHAUSTED, st.invocations, st.deepest, True
    return end, st.invocations, st.deepest, False


cdef struct PackState:
    long *memo
    long width
    long long evaluations
    long long hits
    int leftrec


cdef long pack_ev(Prog *g, PackState *st, int e, long p) nogil:
    cdef int k = g.kinds[e]
    cdef long r, slot
    if k == K_CHAR:
        if p < g.n and g.data[p] == g.a1[e]:
            return p + 1
        return C_FAIL
    if k == K_EMPTY:
        return p
    if k == K_ANY:
        return p + 1 if p < g.n else C_FAIL
    if k == K_NT:
        slot = g.a1[e] * st.width + p
        r = st.memo[slot]
        if r == C_RUNNING:
            st.leftrec = 1
            return C_ABORT
        if r != C_UNKNOWN:
            st.hits += 1
            return r
        st.evaluations += 1
        st.memo[slot] = C_RUNNING
        r = pack_ev(g, st, g.bodies[g.a1[e]], p)
        st.memo[slot] = r
        return r
    if k == K_NOT:
        r = pack_ev(g, st, g.a1[e], p)
        if r == C_ABORT:
            return r
        return p if r == C_FAIL else C_FAIL
    if k == K_SEQ:
        r = pack_ev(g, st, g.a1[e], p)
        if r < 0:
            return r
        return pack_ev(g, st, g.a2[e], r)
    r = pack_ev(g, st, g.a1[e], p)
    if r == C_FAIL:
        return pack_ev(g, st, g.a2[e], p)
    return r


def packrat_run(const int[:] kinds, const int[:] a1, const int[:] a2, const int[:] bodies,
                const unsigned char[:] data, int node, int nrules, dense, trace=None):
    # the compiled path always uses a dense table; sparse or traced runs go
    # through the pure kernel
    if trace is not None or not dense:
        raise ValueError("sparse or traced runs require the pure-Python kernel")
    cdef Prog g
    cdef PackState st
    cdef long end, i, size
    g.kinds = &kinds[0]
    g.a1 = &a1[0]
    g.a2 = &a2[0]
    g.bodies = &bodies[0] if bodies.shape[0] else NULL
    g.data = &data[0] if data.shape[0] else NULL
    g.n = data.shape[0]
    st.width = g.n + 1
    size = nrules * st.width
    st.memo = <long *> malloc(max(size, 1) * sizeof(long))
    if st.memo == NULL:
        raise MemoryError()
    for i in range(size):
        st.memo[i] = C_UNKNOWN
    st.evaluations = 0
    st.hits = 0
    st.leftrec = 0
    try:
        with nogil:
            end = pack_ev(&g, &st, node, 0)
    finally:
        free(st.memo)
    if st.leftrec:
        raise LeftRecursionDetected("left recursion reached during packrat run")
    return end, st.evaluations, st.hits, st.evaluations
