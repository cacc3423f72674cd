"""Backend selection and flat program compilation for the classical engines.

The compiled extension is used when it imports and ``PEGDERIV_PURE`` is
unset; otherwise the pure-Python kernels run.  Both expose
``naive_run`` and ``packrat_run`` with identical signatures.
"""

from __future__ import annotations

import os
import sys
import threading
from array import array
from dataclasses import dataclass

from . import _kernels_py
from .grammar import ALT, ANY, CHAR, EMPTY, NOT, NT, SEQ, Grammar, GrammarError

if os.environ.get("PEGDERIV_PURE"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
FAIL = _kernels_py.FAIL
EXHAUSTED = _kernels_py.EXHAUSTED

_KIND_CODE = {
    CHAR: _kernels_py.K_CHAR,
    EMPTY: _kernels_py.K_EMPTY,
    NT: _kernels_py.K_NT,
    NOT: _kernels_py.K_NOT,
    SEQ: _kernels_py.K_SEQ,
    ALT: _kernels_py.K_ALT,
    ANY: _kernels_py.K_ANY,
}


def backend_module(pure: bool = False):
    if pure or _compiled is None:
        return _kernels_py
    return _compiled


def left_recursion_errors() -> tuple:
    errs = [_kernels_py.LeftRecursionDetected]
    if _compiled is not None:
        errs.append(_compiled.LeftRecursionDetected)
    return tuple(errs)


@dataclass
class Program:
    kinds: array
    a1: array
    a2: array
    bodies: array
    rule_names: list[str]

    @property
    def size(self) -> int:
        return len(self.kinds)


_program_cache: dict[int, tuple[Grammar, Program]] = {}


def compile_program(g: Grammar) -> Program:
    """Flatten a core grammar into int arrays indexed by node id."""
    cached = _program_cache.get(id(g))
    if cached is not None and cached[0] is g:
        return cached[1]
    names = list(g.rules)
    index = {name: i for i, name in enumerate(names)}
    kinds = array("i")
    a1 = array("i")
    a2 = array("i")
    for e in g.store:
        code = _KIND_CODE.get(e.kind)
        if code is None:
            raise GrammarError(f"grammar is not desugared ({e.kind} node present)")
        kinds.append(code)
        if e.kind == CHAR:
            a1.append(e.a)
            a2.append(0)
        elif e.kind == NT:
            a1.append(index[e.a])
            a2.append(0)
        elif e.kind == NOT:
            a1.append(e.a)
            a2.append(0)
        elif e.kind in (SEQ, ALT):
            a1.append(e.a)
            a2.append(e.b)
        else:
            a1.append(0)
            a2.append(0)
    bodies = array("i", (g.rules[name] for name in names))
    prog = Program(kinds, a1, a2, bodies, names)
    if len(_program_cache) > 256:
        _program_cache.clear()
    _program_cache[id(g)] = (g, prog)
    return prog


# Deep recursion: the kernels recurse once per expression level, so long
# inputs run on a worker thread with a large stack.
_DEEP_STACK = 512 * 1024 * 1024
_SHALLOW_WORK = 4000


def run_deep(fn, *args, work_hint: int = 0):
    if work_hint < _SHALLOW_WORK:
        return fn(*args)
    result: list = []
    error: list = []

    def target():
        old_limit = sys.getrecursionlimit()
        try:
            sys.setrecursionlimit(max(old_limit, 1_000_000))
            result.append(fn(*args))
        except BaseException as exc:  # re-raised on the caller's thread
            error.append(exc)
        finally:
            sys.setrecursionlimit(old_limit)

    old_size = threading.stack_size()
    threading.stack_size(_DEEP_STACK)
    try:
        worker = threading.Thread(target=target, name="pegderiv-deep")
        worker.start()
    finally:
        threading.stack_size(old_size)
    worker.join()
    if error:
        raise error[0]
    return result[0]
