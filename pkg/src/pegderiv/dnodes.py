"""Annotated expression nodes for derivative parsing, with compaction.

Every constructor in :class:`NodeFactory` returns an interned node with the
compaction rules already applied at that node.  Nodes are immutable and
carry their back set, match set and newest generation ``nm``.

Generation conventions: gen 0 is the current position (still consuming).
A positive gen names a past position.  In a node built straight from the
grammar every positive gen names the node's start.
"""

from __future__ import annotations

from itertools import count

from .gens import (
    EMPTY_SET,
    ZERO_MAP,
    ZERO_SET,
    InvariantViolation,
    compose,
    identity,
    is_identity,
    max_value,
    new_gens,
    restrict,
)

K_CHAR, K_ANY, K_EMPTY, K_LOOK, K_FAIL, K_INF, K_NT, K_NOT, K_MAP, K_ALT, K_SEQ = range(11)
KIND_NAMES = ("char", "any", "empty", "look", "fail", "inf", "nt", "not", "map", "alt", "seq")
ATOM_KINDS = frozenset({K_CHAR, K_ANY, K_EMPTY, K_LOOK, K_FAIL, K_INF, K_NT})

_uids = count()


class DNode:
    """One annotated node.

    Field use by kind: ``a`` holds the byte (char), gen (look), rule name
    (nt) or first child; ``b`` the second child (alt) or the right-hand
    template (seq).  ``A``/``B`` are generation maps.  For seq,
    ``fol`` is a tuple of followers (alpha_gen, node, map, fallback_end)
    and ``bz``/``Bz``/``lz`` hold the empty-match follower.
    """

    __slots__ = ("kind", "a", "b", "A", "B", "m", "fol", "bz", "Bz", "lz", "back", "match", "nm", "uid", "key")

    def __init__(self, kind, key, a=None, b=None, A=None, B=None, m=0, fol=(), bz=None, Bz=None, lz=0):
        self.kind = kind
        self.key = key
        self.a = a
        self.b = b
        self.A = A
        self.B = B
        self.m = m
        self.fol = fol
        self.bz = bz
        self.Bz = Bz
        self.lz = lz
        self.uid = next(_uids)

    def children(self) -> list["DNode"]:
        k = self.kind
        if k == K_NOT or k == K_MAP:
            return [self.a]
        if k == K_ALT:
            return [self.a, self.b]
        if k == K_SEQ:
            # a failure atom in the template or the empty-match slot means
            # "no continuation" and is not counted as a child
            out = [self.a]
            if self.b.kind != K_FAIL:
                out.append(self.b)
            out.extend(f[1] for f in self.fol)
            if not (self.bz.kind == K_FAIL and self.lz == 0):
                out.append(self.bz)
            return out
        return []

    def __repr__(self) -> str:
        return show(self)


def _atom(kind, key, a=None, back=ZERO_SET, match=EMPTY_SET, nm=0) -> DNode:
    n = DNode(kind, key, a=a)
    n.back = back
    n.match = match
    n.nm = nm
    return n


EMPTY = _atom(K_EMPTY, (K_EMPTY,), match=ZERO_SET)
FAIL = _atom(K_FAIL, (K_FAIL,))
INF = _atom(K_INF, (K_INF,))
ANY = _atom(K_ANY, (K_ANY,))
_CHARS = [_atom(K_CHAR, (K_CHAR, b), a=b) for b in range(256)]
_LOOKS: dict[int, DNode] = {}


def char(b: int) -> DNode:
    return _CHARS[b]


def look(i: int) -> DNode:
    """The lookahead-success atom for gen i; gen 0 is plain success."""
    if i == 0:
        return EMPTY
    n = _LOOKS.get(i)
    if n is None:
        s = frozenset((i,))
        n = _LOOKS[i] = _atom(K_LOOK, (K_LOOK, i), a=i, back=s, match=s, nm=i)
    return n


def _dead(n: DNode) -> bool:
    return n.kind == K_FAIL or n.kind == K_INF


def seq_back(a: DNode, fol, bz: DNode, Bz, lz: int) -> frozenset:
    out = set()
    if 0 in a.back:
        out.add(0)
    for _, bi, Bi, li in fol:
        if not _dead(bi):
            out.update(compose(Bi, bi.back))
        if li:
            out.add(li)
    if not _dead(bz):
        out.update(compose(Bz, bz.back))
    if lz:
        out.add(lz)
    return frozenset(out)


class NodeFactory:
    """Interning constructors with compaction.

    Nodes are looked up first in the persistent (grammar) table and then in
    the current step table; new nodes go to the step table unless
    ``static`` is set.  ``begin_step`` discards the step table.
    """

    def __init__(self, fuse_maps: bool = True):
        self.static_index: dict[tuple, DNode] = {}
        self.step_index: dict[tuple, DNode] = {}
        self.static = True
        self.fuse_maps = fuse_maps
        self.compactions = 0
        self.nt_info: dict[str, tuple[frozenset, frozenset, int]] = {}

    def begin_step(self) -> None:
        self.static = False
        self.step_index = {}
        self.compactions = 0

    def _intern(self, key: tuple, build) -> DNode:
        n = self.static_index.get(key)
        if n is None:
            n = self.step_index.get(key)
            if n is None:
                n = build(key)
                (self.static_index if self.static else self.step_index)[key] = n
        return n

    # -- atoms --------------------------------------------------------------

    def nt(self, name: str) -> DNode:
        back, match, nm = self.nt_info[name]

        def build(key):
            return _atom(K_NT, key, a=name, back=back, match=match, nm=nm)

        return self._intern((K_NT, name), build)

    # -- compound constructors (compacting) --------------------------------

    def not_(self, a: DNode) -> DNode:
        if a.match:
            self.compactions += 1
            return FAIL
        if a.kind == K_FAIL:
            self.compactions += 1
            return look(1)
        if a.kind == K_INF:
            self.compactions += 1
            return INF
        return self.raw_not(a)

    def raw_not(self, a: DNode) -> DNode:
        def build(key):
            n = DNode(K_NOT, key, a=a)
            n.back = frozenset((1,))
            n.match = EMPTY_SET
            n.nm = 1
            return n

        return self._intern((K_NOT, a.uid), build)

    def map_(self, a: DNode, A: tuple, m: int) -> DNode:
        k = a.kind
        if k == K_EMPTY or k == K_LOOK:
            self.compactions += 1
            target = dict(A).get(a.a if k == K_LOOK else 0)
            if target is None:
                raise InvariantViolation(f"map {A} does not cover {show(a)}")
            return look(target)
        if k == K_FAIL or k == K_INF:
            self.compactions += 1
            return a
        A = restrict(A, a.back)
        if is_identity(A):
            self.compactions += 1
            return a
        if k == K_MAP and self.fuse_maps:
            self.compactions += 1
            outer = dict(A)
            return self.map_(a.a, tuple((g, outer[v]) for g, v in a.A), m)
        return self.raw_map(a, A, m)

    def raw_map(self, a: DNode, A: tuple, m: int) -> DNode:
        def build(key):
            n = DNode(K_MAP, key, a=a, A=A, m=m)
            n.back = compose(A, a.back)
            n.match = compose(A, a.match)
            n.nm = m
            return n

        return self._intern((K_MAP, a.uid, A, m), build)

    def alt(self, a: DNode, b: DNode, A: tuple, B: tuple, m: int) -> DNode:
        if a.kind == K_FAIL:
            self.compactions += 1
            return self.map_(b, B, m)
        if b.kind == K_FAIL or a.match:
            self.compactions += 1
            return self.map_(a, A, m)
        if a.kind == K_INF:
            self.compactions += 1
            return INF
        return self.raw_alt(a, b, restrict(A, a.back), restrict(B, b.back), m)

    def raw_alt(self, a: DNode, b: DNode, A: tuple, B: tuple, m: int) -> DNode:
        def build(key):
            n = DNode(K_ALT, key, a=a, b=b, A=A, B=B, m=m)
            n.back = compose(A, a.back) | compose(B, b.back)
            n.match = compose(A, a.match) | compose(B, b.match)
            n.nm = m
            return n

        return self._intern((K_ALT, a.uid, b.uid, A, B, m), build)

    def select(self, bi: DNode, Bi: tuple, li: int, gen_node: DNode, m: int) -> DNode:
        """Continue with follower ``bi``; ``li`` > 0 is its fallback end.

        The fallback is expressed as an alternation with ``gen_node``
        (a lookahead atom) whose single gen maps to ``li``.
        """
        if li == 0:
            return self.map_(bi, Bi, m)
        return self.alt(bi, gen_node, Bi, ((gen_node.a, li),), m)

    def seq(self, a: DNode, b: DNode, fol: tuple, bz: DNode, Bz: tuple, lz: int, m: int) -> DNode:
        k = a.kind
        if k == K_EMPTY:
            self.compactions += 1
            if m == 0:
                return b
            return self.map_(b, restrict(new_gens(b.back, m - 1), b.back), m)
        if k == K_LOOK:
            self.compactions += 1
            for g, bi, Bi, li in fol:
                if g == a.a:
                    return self.select(bi, Bi, li, a, m)
            return FAIL
        if k == K_FAIL:
            self.compactions += 1
            if bz.kind == K_FAIL and lz == 0:
                return FAIL
            return self.select(bz, Bz, lz, look(1), m)
        if k == K_INF:
            self.compactions += 1
            return INF
        return self.raw_seq(a, b, fol, bz, Bz, lz, m)

    def raw_seq(self, a, b, fol, bz, Bz, lz, m) -> DNode:
        # a dead follower that only carries a fallback end is stored as the
        # equivalent lookahead atom, keeping the failure atom out of the DAG
        fol = tuple((g, look(1), ((1, li),), 0) if bi.kind == K_FAIL else (g, bi, Bi, li)
                    for g, bi, Bi, li in fol if bi.kind != K_FAIL or li)
        if bz.kind == K_FAIL and lz:
            bz, Bz, lz = look(1), ((1, lz),), 0

        def build(key):
            n = DNode(K_SEQ, key, a=a, b=b, fol=fol, bz=bz, Bz=Bz, lz=lz, m=m)
            n.back = seq_back(a, fol, bz, Bz, lz)
            n.match = EMPTY_SET
            n.nm = m
            return n

        key = (K_SEQ, a.uid, b.uid, tuple((g, bi.uid, Bi, li) for g, bi, Bi, li in fol), bz.uid, Bz, lz, m)
        return self._intern(key, build)

    # -- grammar-resident forms --------------------------------------------

    def static_alt(self, a: DNode, b: DNode) -> DNode:
        A = identity(a.back)
        B = identity(b.back)
        return self.alt(a, b, A, B, max(max_value(A), max_value(B)))

    def static_seq(self, a: DNode, b: DNode) -> DNode:
        if a.kind == K_EMPTY:
            self.compactions += 1
            return b
        lb = 1 if 0 in b.match else 0
        fol = ()
        if 1 in a.back and not (b.kind == K_FAIL and lb == 0):
            fol = ((1, b, restrict(identity(b.back), b.back), lb),)
        if 0 in a.match:
            bz, Bz, lz = b, identity(b.back), lb
        else:
            bz, Bz, lz = FAIL, ZERO_MAP, 0
        vals = [0, lz, max_value(Bz)]
        for f in fol:
            vals += [max_value(f[2]), f[3]]
        m = max(vals)
        return self.seq(a, b, fol, bz, Bz, lz, m)


def raw_look(i: int) -> DNode:
    """A lookahead atom built without compaction; ``raw_look(0)`` is the
    only way to obtain a gen-0 lookahead."""
    s = frozenset((i,))
    return _atom(K_LOOK, (K_LOOK, i, "raw"), a=i, back=s, match=s, nm=i)


def compact(n: DNode, fac: NodeFactory) -> DNode:
    """Apply the compaction rules at ``n``; children are taken as already compact."""
    k = n.kind
    if k == K_LOOK:
        if n.a == 0:
            fac.compactions += 1
            return EMPTY
        return look(n.a)
    if k == K_NOT:
        return fac.not_(n.a)
    if k == K_MAP:
        return fac.map_(n.a, n.A, n.m)
    if k == K_ALT:
        return fac.alt(n.a, n.b, n.A, n.B, n.m)
    if k == K_SEQ:
        return fac.seq(n.a, n.b, n.fol, n.bz, n.Bz, n.lz, n.m)
    return n


# ---------------------------------------------------------------------------
# inspection helpers


def reachable(root: DNode) -> list[DNode]:
    seen: dict[int, DNode] = {}
    stack = [root]
    while stack:
        n = stack.pop()
        if n.uid in seen:
            continue
        seen[n.uid] = n
        stack.extend(n.children())
    return list(seen.values())


def count_nodes(root: DNode) -> int:
    return len(reachable(root))


def _fmt_map(A) -> str:
    return "{" + ",".join(f"{k}:{v}" for k, v in A) + "}"


def show(n: DNode, depth: int = 6) -> str:
    k = n.kind
    if k == K_CHAR:
        b = n.a
        return repr(chr(b)) if 32 <= b < 127 else f"\\x{b:02x}"
    if k == K_ANY:
        return "."
    if k == K_EMPTY:
        return "ε"
    if k == K_LOOK:
        return f"ℓ{n.a}"
    if k == K_FAIL:
        return "∅"
    if k == K_INF:
        return "∞"
    if k == K_NT:
        return n.a
    if depth <= 0:
        return "…"
    d = depth - 1
    if k == K_NOT:
        return f"!{show(n.a, d)}"
    if k == K_MAP:
        return f"({show(n.a, d)})[{_fmt_map(n.A)},{n.m}]"
    if k == K_ALT:
        return f"({show(n.a, d)} / {show(n.b, d)})[{_fmt_map(n.A)},{_fmt_map(n.B)},{n.m}]"
    fol = "; ".join(f"{g}→{show(bi, d)}{_fmt_map(Bi)} l={li}" for g, bi, Bi, li in n.fol)
    return f"({show(n.a, d)} · {show(n.b, d)})[{fol} | ∅→{show(n.bz, d)}{_fmt_map(n.Bz)} l={n.lz}, {n.m}]"
