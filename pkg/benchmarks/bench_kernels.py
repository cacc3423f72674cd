"""Compiled vs pure-Python kernel timings for the naive and packrat engines.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

import argparse
import json
import sys
import timeit

from pegderiv import kernels
from pegderiv.corpus import FAMILIES
from pegderiv.grammar import desugar
from pegderiv.naive import Limits, recognize_naive
from pegderiv.packrat import recognize_packrat

CASES = [
    # (family, n, engine)
    ("exp-grammar", 18, "naive"),
    ("exp-grammar", 2000, "packrat"),
    ("anbncn", 200, "naive"),
    ("anbncn", 2000, "packrat"),
    ("statements", 2000, "naive"),
    ("statements", 20000, "packrat"),
]


def _runner(engine, g, data, pure):
    if engine == "naive":
        limits = Limits(max_invocations=10**9, max_depth=100_000)
        return lambda: recognize_naive(g, data, limits, pure=pure)
    return lambda: recognize_packrat(g, data, pure=pure)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", metavar="PATH")
    args = ap.parse_args(argv)

    if kernels.BACKEND != "compiled":
        print("compiled kernels are not available; build with `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1

    rows = []
    print(f"{'family':<12} {'n':>6} {'engine':<8} {'bytes':>7} {'compiled s':>11} {'python s':>10} {'speedup':>8}")
    for family, n, engine in CASES:
        fam = FAMILIES[family]
        g = desugar(fam.grammar())
        data = fam.make_input(n)
        fast = _runner(engine, g, data, pure=False)
        slow = _runner(engine, g, data, pure=True)
        if fast() != slow():
            raise SystemExit(f"backends disagree on {family} n={n} {engine}")
        t_c = best_of(fast, args.repeat)
        t_p = best_of(slow, max(1, args.repeat // 2))
        rows.append({"family": family, "n": n, "engine": engine, "input_length": len(data),
                     "compiled_s": t_c, "python_s": t_p, "speedup": t_p / t_c})
        print(f"{family:<12} {n:>6} {engine:<8} {len(data):>7} {t_c:>11.5f} {t_p:>10.5f} {t_p / t_c:>7.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
