"""Streaming, constant-memory cleaning toolkit for Persian (Farsi) text corpora."""

__version__ = "0.1.0"

from .charsets import RuleSet, default_ruleset, is_allowed, load_ruleset, substitute
from .pipeline import PipelineReport, clean_line, clean_stream
from .stats import CorpusStats, Histogram, scan

__all__ = [
    "__version__",
    "RuleSet",
    "default_ruleset",
    "is_allowed",
    "load_ruleset",
    "substitute",
    "PipelineReport",
    "clean_line",
    "clean_stream",
    "CorpusStats",
    "Histogram",
    "scan",
]
