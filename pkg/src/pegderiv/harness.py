"""Random grammars, exhaustive inputs, differential runs and scaling tables."""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .corpus import FAMILIES, Family
from .derivative import FAIL_VERDICT, DerivativeSession, inject
from .grammar import Grammar, GrammarError, check_well_formed, desugar, parse_grammar
from .naive import Limits, ResourceExhausted, recognize_naive
from .packrat import recognize_packrat

HARNESS_LIMITS = Limits(max_invocations=2_000_000, max_depth=20_000)


@dataclass
class GrammarGenConfig:
    seed: int = 0
    max_rules: int = 8
    max_depth: int = 3
    alphabet: bytes = b"abc"
    sugar_enabled: bool = False
    max_alternatives: int = 4
    max_retries: int = 1000
    anchor_probability: float = 0.5


def _literal(b: int) -> str:
    ch = chr(b)
    if ch.isalnum():
        return ch
    return f"\\x{b:02x}"


class _Gen:
    def __init__(self, cfg: GrammarGenConfig, rng: random.Random, names: list[str]):
        self.cfg = cfg
        self.rng = rng
        self.names = names

    def atom(self) -> str:
        r = self.rng.random()
        alpha = self.cfg.alphabet
        if r < 0.45:
            return "'" + _literal(self.rng.choice(alpha)) + "'"
        if r < 0.7:
            return self.rng.choice(self.names)
        if r < 0.78:
            return "''"
        if r < 0.86:
            return "."
        k = self.rng.randint(2, 3)
        return "'" + "".join(_literal(self.rng.choice(alpha)) for _ in range(k)) + "'"

    def expr(self, depth: int) -> str:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.25:
            if self.cfg.sugar_enabled and rng.random() < 0.1:
                members = sorted(rng.sample(list(self.cfg.alphabet), rng.randint(1, len(self.cfg.alphabet))))
                return "[" + "".join(_literal(b) for b in members) + "]"
            return self.atom()
        ops = ["seq", "seq", "alt", "alt", "not"]
        if self.cfg.sugar_enabled:
            ops += ["star", "plus", "opt", "and"]
        op = rng.choice(ops)
        if op == "seq":
            return " ".join(self.wrap(self.expr(depth - 1)) for _ in range(rng.randint(2, 3)))
        if op == "alt":
            n = rng.randint(2, self.cfg.max_alternatives)
            return " / ".join(self.expr(depth - 1) for _ in range(n))
        inner = "(" + self.expr(depth - 1) + ")"
        return {"not": "!" + inner, "and": "&" + inner, "star": inner + "*", "plus": inner + "+", "opt": inner + "?"}[op]

    def wrap(self, text: str) -> str:
        return f"({text})" if " / " in text else text


def gen_grammar(cfg: GrammarGenConfig) -> Grammar:
    """Random well-formed grammar; identical configs give identical grammars."""
    rng = random.Random(cfg.seed)
    for _ in range(cfg.max_retries):
        nrules = rng.randint(1, cfg.max_rules)
        names = [chr(ord("A") + i) for i in range(nrules)]
        gen = _Gen(cfg, rng, names)
        bodies = [gen.expr(cfg.max_depth) for _ in names]
        if nrules > 1 and rng.random() < 0.7:
            # make the start rule lean on the others
            bodies[0] = " ".join(gen.wrap(gen.expr(1)) + " " + rng.choice(names[1:]) for _ in range(rng.randint(1, 2)))
        if rng.random() < cfg.anchor_probability:
            bodies[0] = gen.wrap(bodies[0]) + " !."
        source = "".join(f"{name} <- {body}\n" for name, body in zip(names, bodies))
        g = parse_grammar(source)
        if check_well_formed(desugar(g)).well_formed:
            return g
    raise GrammarError(f"no well-formed grammar after {cfg.max_retries} attempts (seed {cfg.seed})")


def gen_inputs(alphabet: Iterable[int] | bytes, max_len: int, extra: int = 0, extra_len: int = 0,
               seed: int = 0) -> list[bytes]:
    """All strings up to ``max_len`` in length-then-lexicographic order,
    optionally followed by ``extra`` random strings of length ``extra_len``."""
    symbols = sorted(set(bytes(alphabet)))
    out = [b""]
    for k in range(1, max_len + 1):
        out.extend(bytes(t) for t in itertools.product(symbols, repeat=k))
    if extra:
        rng = random.Random(seed)
        out.extend(bytes(rng.choice(symbols) for _ in range(extra_len)) for _ in range(extra))
    return out


@dataclass
class DiffReport:
    grammar: str
    disagreements: list[tuple[str, str, str, str]] = field(default_factory=list)
    budget_exhaustions: list[str] = field(default_factory=list)
    attempted: int = 0
    compared: int = 0

    @property
    def passed(self) -> bool:
        return not self.disagreements

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _show(data: bytes) -> str:
    return data.decode("latin-1")


class _PrefixSessions:
    """Derivative sessions shared across inputs with common prefixes."""

    def __init__(self, g: Grammar):
        self.root = DerivativeSession(inject(g), record_metrics=False)
        self.cache: dict[bytes, DerivativeSession] = {b"": self.root}

    def get(self, data: bytes) -> DerivativeSession:
        s = self.cache.get(data)
        if s is None:
            s = self.get(data[:-1]).fork()
            s.feed(data[-1:])
            self.cache[data] = s
        return s

    def verdict(self, data: bytes) -> str:
        s = self.get(data)
        if s.verdict is not None:
            return s.verdict
        return s.fork().finish()


def differential_run(g: Grammar, inputs: Sequence[bytes], limits: Limits | None = None) -> DiffReport:
    limits = limits or HARNESS_LIMITS
    core = desugar(g) if not g.is_core() else g
    report = DiffReport(grammar=g.source or g.to_source())
    sessions = _PrefixSessions(core)
    for data in inputs:
        report.attempted += 1
        p_verdict, p_len, _ = recognize_packrat(core, data)
        d_verdict = sessions.verdict(data)
        try:
            n_verdict, n_len, _ = recognize_naive(core, data, limits)
        except ResourceExhausted:
            report.budget_exhaustions.append(_show(data))
            if p_verdict != d_verdict:
                report.disagreements.append((_show(data), "exhausted", p_verdict, d_verdict))
            continue
        report.compared += 1
        if not (n_verdict == p_verdict == d_verdict and n_len == p_len):
            naive_txt = n_verdict if n_len == p_len else f"{n_verdict}@{n_len}"
            packrat_txt = p_verdict if n_len == p_len else f"{p_verdict}@{p_len}"
            report.disagreements.append((_show(data), naive_txt, packrat_txt, d_verdict))
    return report


# ---------------------------------------------------------------------------
# scaling


ENGINES = ("naive", "packrat", "derivative")


def bench_scaling(family: Family | str, n_values: Iterable[int], engines: Sequence[str] = ENGINES,
                  limits: Limits | None = None) -> list[dict]:
    """One row per (n, engine) with timing and structural counters."""
    if isinstance(family, str):
        family = FAMILIES[family]
    g = family.grammar()
    core = desugar(g)
    rows = []
    for n in n_values:
        data = family.make_input(n)
        for engine in engines:
            row = {
                "family": family.name, "n": n, "input_length": len(data), "engine": engine,
                "verdict": None, "wall_time": 0.0, "exhausted": False,
                "naive_invocations": None, "packrat_evaluations": None, "memo_entries": None,
                "steps": None, "peak_nodes": None, "max_generation": None, "max_live_generations": None,
            }
            t0 = time.perf_counter()
            if engine == "naive":
                try:
                    verdict, _, stats = recognize_naive(core, data, limits)
                    row["verdict"] = verdict
                except ResourceExhausted as exc:
                    stats = exc.stats
                    row["exhausted"] = True
                row["naive_invocations"] = stats.nonterminal_invocations
            elif engine == "packrat":
                verdict, _, stats = recognize_packrat(core, data)
                row["verdict"] = verdict
                row["packrat_evaluations"] = stats.evaluations
                row["memo_entries"] = stats.memo_entries
            elif engine == "derivative":
                s = DerivativeSession(inject(core))
                s.feed(data)
                row["verdict"] = s.finish()
                row["steps"] = len(s.metrics)
                row["peak_nodes"] = max((m.nodes_after for m in s.metrics), default=s._size)
                row["max_generation"] = max((m.max_generation for m in s.metrics), default=0)
                row["max_live_generations"] = max((m.live_generations for m in s.metrics), default=0)
            else:
                raise ValueError(f"unknown engine {engine}")
            row["wall_time"] = time.perf_counter() - t0
            rows.append(row)
    return rows


__all__ = [
    "DiffReport",
    "FAIL_VERDICT",
    "GrammarGenConfig",
    "bench_scaling",
    "differential_run",
    "gen_grammar",
    "gen_inputs",
]
