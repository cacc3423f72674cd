"""Line-delimited JSON metrics documents.

Layout: one header line, then per run a ``run`` line followed by its
``step`` lines.  ``elapsed`` is the only timing field; everything else is
deterministic for a given grammar and input.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional

from .derivative import StepMetrics

FORMAT = "pegderiv-metrics"
VERSION = 1
STEP_FIELDS = (
    "position", "symbol", "nodes_before", "nodes_after", "unique_subexpressions",
    "max_generation", "live_generations", "compactions_fired", "elapsed",
)
TIMING_FIELDS = frozenset({"elapsed", "wall_time"})


def grammar_hash(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()[:16]


@dataclass
class RunResult:
    engine: str
    verdict: str
    grammar_hash: str
    input_length: int
    consumed: Optional[int] = None
    metrics: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.consumed is None) != (self.engine == "derivative"):
            raise ValueError("consumed is reported by the naive and packrat engines only")


def header() -> dict:
    return {"type": "header", "format": FORMAT, "version": VERSION}


def run_records(run: RunResult) -> list[dict]:
    head = {
        "type": "run",
        "engine": run.engine,
        "grammar_hash": run.grammar_hash,
        "input_length": run.input_length,
        "verdict": run.verdict,
    }
    if run.consumed is not None:
        head["consumed"] = run.consumed
    if run.stats:
        head["stats"] = run.stats
    out = [head]
    for m in run.metrics:
        d = m.to_dict() if isinstance(m, StepMetrics) else dict(m)
        out.append({"type": "step", **{k: d[k] for k in STEP_FIELDS}})
    return out


def dumps(runs: Iterable[RunResult]) -> str:
    lines = [json.dumps(header(), sort_keys=True)]
    for run in runs:
        lines.extend(json.dumps(rec, sort_keys=True) for rec in run_records(run))
    return "\n".join(lines) + "\n"


def write(path_or_file, runs: Iterable[RunResult]) -> None:
    text = dumps(runs)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="utf-8") as fh:
            fh.write(text)


def loads(text: str) -> list[dict]:
    records = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not records or records[0].get("type") != "header" or records[0].get("format") != FORMAT:
        raise ValueError("not a metrics document")
    if records[0].get("version") != VERSION:
        raise ValueError(f"unsupported metrics version {records[0].get('version')}")
    return records


def read(path_or_file) -> list[dict]:
    if hasattr(path_or_file, "read"):
        return loads(path_or_file.read())
    with open(path_or_file, encoding="utf-8") as fh:
        return loads(fh.read())


def strip_timing(records: list[dict]) -> list[dict]:
    return [{k: v for k, v in rec.items() if k not in TIMING_FIELDS} for rec in records]
