"""PEG recognition with naive, packrat and derivative engines."""

from .grammar import (
    Grammar,
    GrammarError,
    GrammarSyntaxError,
    WellFormednessReport,
    check_well_formed,
    desugar,
    parse_grammar,
)
from .kernels import BACKEND
from .naive import Limits, NaiveStats, Outcome, ResourceExhausted, match_naive, recognize_naive
from .packrat import PackratStats, recognize_packrat

__all__ = [
    "BACKEND",
    "Grammar",
    "GrammarError",
    "GrammarSyntaxError",
    "Limits",
    "NaiveStats",
    "Outcome",
    "PackratStats",
    "ResourceExhausted",
    "WellFormednessReport",
    "check_well_formed",
    "desugar",
    "match_naive",
    "parse_grammar",
    "recognize_naive",
    "recognize_packrat",
]
